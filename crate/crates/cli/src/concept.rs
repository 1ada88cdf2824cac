use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use crate::config::{Format, RunConfig};
use crate::output::{file_safe, load_sessions, session_stem, Cell, Run, Table, TextTable};
use dyad::conceptnet::{
    build_map, intersect as intersect_maps, map_stats, preprocess, worksheet_overlap, ConceptMap,
    Lexicon, MapStats,
};
use dyad::Session;

fn lexicon(cfg: &RunConfig) -> Result<Lexicon> {
    let lex = match &cfg.lexicon_dir {
        Some(dir) => Lexicon::from_dir(dir)?,
        None => Lexicon::default(),
    };
    Ok(lex.with_math_domain(cfg.math))
}

fn map_of_text<'a>(
    cfg: &RunConfig,
    lex: &Lexicon,
    texts: impl Iterator<Item = &'a str>,
) -> ConceptMap {
    let sentences: Vec<Vec<String>> = texts.flat_map(|t| preprocess(t, lex)).collect();
    let window = NonZeroUsize::new(cfg.window).expect("validated window");
    let stop = NonZeroUsize::new(cfg.stop_unit).expect("validated stop unit");
    build_map(&sentences, window, stop)
}

fn speaker_maps(cfg: &RunConfig, lex: &Lexicon, s: &Session) -> [ConceptMap; 2] {
    s.speakers()
        .map(|sp| map_of_text(cfg, lex, s.utterances_by(sp).map(|u| u.text.as_str())))
}

/// Writes `<stem>.json`, or `<stem>.nodes.csv` and `<stem>.edges.csv`, plus
/// `<stem>.dot`.
fn write_map(run: &mut Run<'_>, stem: &str, map: &ConceptMap) -> Result<()> {
    match run.cfg.format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(map)?;
            bytes.push(b'\n');
            run.write(&format!("{stem}.json"), &bytes)?;
        }
        Format::Csv => {
            let mut nodes = Table::new(&["concept"]);
            for n in map.nodes() {
                nodes.push(vec![n.clone().into()]);
            }
            let mut edges = Table::new(&["source", "target", "weight"]);
            for e in map.edge_list() {
                edges.push(vec![e.source.into(), e.target.into(), e.weight.into()]);
            }
            run.write(&format!("{stem}.nodes.csv"), &nodes.render(Format::Csv)?)?;
            run.write(&format!("{stem}.edges.csv"), &edges.render(Format::Csv)?)?;
        }
    }
    let name = Path::new(stem)
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    run.write(&format!("{stem}.dot"), map.to_dot(&name).as_bytes())
}

fn read_map(run: &mut Run<'_>, path: &Path) -> Result<ConceptMap> {
    let name = path.to_string_lossy();
    if name.ends_with(".json") {
        let bytes = run.read_input(path)?;
        return serde_json::from_slice(&bytes)
            .with_context(|| format!("parsing {}", path.display()));
    }
    let Some(base) = name.strip_suffix(".edges.csv") else {
        bail!(
            "{}: expected a `.json` map or an `.edges.csv` edge list",
            path.display()
        );
    };
    run.read_input(path)?;
    let edges = TextTable::read(path)?;
    let (s, t, w) = (
        edges.column("source")?,
        edges.column("target")?,
        edges.column("weight")?,
    );
    let edge_rows = edges
        .rows
        .iter()
        .map(|r| {
            let weight = r[w]
                .parse::<u64>()
                .with_context(|| format!("{}: bad weight `{}`", path.display(), r[w]))?;
            Ok((r[s].clone(), r[t].clone(), weight))
        })
        .collect::<Result<Vec<_>>>()?;
    let nodes_path = PathBuf::from(format!("{base}.nodes.csv"));
    let mut nodes = Vec::new();
    if nodes_path.is_file() {
        run.read_input(&nodes_path)?;
        let table = TextTable::read(&nodes_path)?;
        let c = table.column("concept")?;
        nodes = table
            .rows
            .into_iter()
            .map(|mut r| r.swap_remove(c))
            .collect();
    }
    Ok(ConceptMap::from_parts(nodes, edge_rows))
}

pub fn build(cfg: &RunConfig, inputs: &[PathBuf]) -> Result<()> {
    let mut run = Run::new(cfg, "conceptmap-build");
    let sessions = load_sessions(&mut run, inputs)?;
    let lex = lexicon(cfg)?;
    let maps: Vec<[ConceptMap; 2]> = sessions
        .par_iter()
        .map(|s| speaker_maps(cfg, &lex, s))
        .collect();
    for (s, pair) in sessions.iter().zip(&maps) {
        for (speaker, map) in s.speakers().iter().zip(pair) {
            write_map(
                &mut run,
                &format!("conceptmaps/{}_{}", session_stem(s), file_safe(speaker)),
                map,
            )?;
        }
    }
    run.finish()
}

pub fn intersect(cfg: &RunConfig, a: &Path, b: &Path, name: &str) -> Result<()> {
    let mut run = Run::new(cfg, "conceptmap-intersect");
    let ma = read_map(&mut run, a)?;
    let mb = read_map(&mut run, b)?;
    write_map(
        &mut run,
        &format!("conceptmaps/{}", file_safe(name)),
        &intersect_maps(&ma, &mb),
    )?;
    run.finish()
}

fn stats_row(s: &Session, comparison: String, st: &MapStats) -> Vec<Cell> {
    vec![
        s.dyad_id().into(),
        s.session_index().into(),
        comparison.into(),
        st.shared_concepts.into(),
        st.isolated_shared_concepts.into(),
        st.non_isolated_shared_concepts.into(),
        st.shared_links.into(),
        st.distinct_shared_links.into(),
        st.mean_betweenness.into(),
    ]
}

pub fn stats(cfg: &RunConfig, inputs: &[PathBuf], worksheet: Option<&Path>) -> Result<()> {
    let mut run = Run::new(cfg, "conceptmap-stats");
    let sessions = load_sessions(&mut run, inputs)?;
    let lex = lexicon(cfg)?;
    let sheet = match worksheet {
        Some(path) => {
            let bytes = run.read_input(path)?;
            let text = String::from_utf8(bytes)
                .with_context(|| format!("{}: not UTF-8", path.display()))?;
            Some(map_of_text(cfg, &lex, std::iter::once(text.as_str())))
        }
        None => None,
    };
    let rows: Vec<Vec<Vec<Cell>>> = sessions
        .par_iter()
        .map(|s| {
            let maps = speaker_maps(cfg, &lex, s);
            let mut rows = vec![stats_row(
                s,
                "partners".into(),
                &map_stats(&intersect_maps(&maps[0], &maps[1])),
            )];
            if let Some(sheet) = &sheet {
                for (speaker, map) in s.speakers().iter().zip(&maps) {
                    rows.push(stats_row(
                        s,
                        format!("{speaker}~worksheet"),
                        &worksheet_overlap(map, sheet),
                    ));
                }
            }
            rows
        })
        .collect();
    let mut table = Table::new(&[
        "dyad",
        "session",
        "comparison",
        "shared_concepts",
        "isolated_shared_concepts",
        "non_isolated_shared_concepts",
        "shared_links",
        "distinct_shared_links",
        "mean_betweenness",
    ]);
    for row in rows.into_iter().flatten() {
        table.push(row);
    }
    run.write_table("conceptmap_stats", &table)?;
    run.finish()
}
