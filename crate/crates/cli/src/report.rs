use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use crate::config::RunConfig;
use crate::output::{Cell, Run, Table, TextTable};
use crate::Method;
use dyad::stats::{pearson, point_biserial, spearman};

fn numeric_column(table: &TextTable, name: &str, path: &Path) -> Result<Vec<Option<f64>>> {
    let c = table.column(name)?;
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let cell = r[c].trim();
            if cell.is_empty() {
                return Ok(None);
            }
            let v = match cell {
                "true" => 1.0,
                "false" => 0.0,
                other => other.parse().with_context(|| {
                    format!(
                        "{} row {}: `{name}` = `{other}` is not numeric",
                        path.display(),
                        i + 1
                    )
                })?,
            };
            Ok(Some(v))
        })
        .collect()
}

pub fn correlate(cfg: &RunConfig, path: &Path, x: &str, y: &str, method: Method) -> Result<()> {
    let mut run = Run::new(cfg, "correlate");
    run.read_input(path)?;
    let table = TextTable::read(path)?;
    let xs = numeric_column(&table, x, path)?;
    let ys = numeric_column(&table, y, path)?;
    let (xv, yv): (Vec<f64>, Vec<f64>) = xs
        .into_iter()
        .zip(ys)
        .filter_map(|(a, b)| Some((a?, b?)))
        .unzip();
    let result = match method {
        Method::Pearson => pearson(&xv, &yv),
        Method::Spearman => spearman(&xv, &yv),
        Method::PointBiserial => point_biserial(&xv, &yv),
    }
    .with_context(|| format!("stage `correlate`, {x} vs {y}"))?;
    let mut out = Table::new(&["x", "y", "method", "n", "coefficient", "p_value"]);
    out.push(vec![
        x.into(),
        y.into(),
        result.kind.to_string().into(),
        result.n.into(),
        result.coefficient.into(),
        result.p_value.into(),
    ]);
    run.write_table("correlate", &out)?;
    run.finish()
}

type Key = (String, u64);

/// Per-session values gathered from earlier outputs.
#[derive(Debug, Default)]
struct Summary {
    slices: BTreeSet<String>,
    speakers: Vec<String>,
    words: BTreeMap<String, f64>,
    converged: Option<(usize, usize)>,
    composite: Option<f64>,
    granger_significant: Option<usize>,
    dtw: Option<(usize, f64)>,
    concepts: Option<[String; 4]>,
}

fn find_table(dir: &Path, stem: &str, preferred: &str) -> Option<PathBuf> {
    [preferred, "csv", "json"]
        .iter()
        .map(|ext| dir.join(format!("{stem}.{ext}")))
        .find(|p| p.is_file())
}

fn session_key(t: &TextTable, row: &[String], path: &Path) -> Result<Key> {
    let session = &row[t.column("session")?];
    let idx = session
        .parse()
        .with_context(|| format!("{}: bad session index `{session}`", path.display()))?;
    Ok((row[t.column("dyad")?].clone(), idx))
}

fn cell<'a>(t: &TextTable, row: &'a [String], name: &str) -> Result<&'a str> {
    Ok(row[t.column(name)?].as_str())
}

/// Builds `report/summary` with one row per session found in the outputs
/// under `dir`, and `report/features_long` with one row per slice, speaker
/// and feature.
pub fn report(cfg: &RunConfig, dir: &Path) -> Result<()> {
    if !dir.is_dir() {
        return Err(crate::UsageError(format!("{} is not a directory", dir.display())).into());
    }
    let mut run = Run::new(cfg, "report");
    let ext = cfg.format.extension();
    let mut sessions: BTreeMap<Key, Summary> = BTreeMap::new();
    let mut found = 0;
    let mut long = Table::new(&["dyad", "session", "slice", "speaker", "feature", "value"]);

    let mut feature_files: Vec<PathBuf> = match std::fs::read_dir(dir.join("features")) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "csv" || e == "json"))
            .collect(),
        Err(_) => Vec::new(),
    };
    feature_files.sort();
    for path in &feature_files {
        found += 1;
        run.read_input(path)?;
        let t = TextTable::read(path)?;
        let features: Vec<&String> = t.columns.iter().skip(t.column("speaker")? + 1).collect();
        for row in &t.rows {
            let key = session_key(&t, row, path)?;
            let speaker = cell(&t, row, "speaker")?.to_string();
            let slice = cell(&t, row, "slice")?.to_string();
            let s = sessions.entry(key.clone()).or_default();
            s.slices.insert(slice.clone());
            if !s.speakers.contains(&speaker) {
                s.speakers.push(speaker.clone());
            }
            let words: f64 = cell(&t, row, "words")?.parse().unwrap_or(0.0);
            *s.words.entry(speaker.clone()).or_insert(0.0) += words;
            for f in &features {
                long.push(vec![
                    key.0.clone().into(),
                    key.1.into(),
                    slice.parse::<u64>().map_or(Cell::Empty, Cell::from),
                    speaker.clone().into(),
                    f.as_str().into(),
                    row[t.column(f)?]
                        .parse::<f64>()
                        .map_or(Cell::Empty, Cell::from),
                ]);
            }
        }
    }

    if let Some(path) = find_table(dir, "converge", ext) {
        found += 1;
        run.read_input(&path)?;
        let t = TextTable::read(&path)?;
        for row in &t.rows {
            let s = sessions.entry(session_key(&t, row, &path)?).or_default();
            let (conv, tested) = s.converged.get_or_insert((0, 0));
            if cell(&t, row, "status")? == "ok" {
                *tested += 1;
                if cell(&t, row, "converged")? == "true" {
                    *conv += 1;
                }
            }
        }
    }
    if let Some(path) = find_table(dir, "strength", ext) {
        found += 1;
        run.read_input(&path)?;
        let t = TextTable::read(&path)?;
        for row in &t.rows {
            let s = sessions.entry(session_key(&t, row, &path)?).or_default();
            s.composite = cell(&t, row, "composite")?.parse().ok();
        }
    }
    if let Some(path) = find_table(dir, "granger", ext) {
        found += 1;
        run.read_input(&path)?;
        let t = TextTable::read(&path)?;
        for row in &t.rows {
            let s = sessions.entry(session_key(&t, row, &path)?).or_default();
            let n = s.granger_significant.get_or_insert(0);
            if cell(&t, row, "significant")? == "true" {
                *n += 1;
            }
        }
    }
    if let Some(path) = find_table(dir, "dtw", ext) {
        found += 1;
        run.read_input(&path)?;
        let t = TextTable::read(&path)?;
        for row in &t.rows {
            let s = sessions.entry(session_key(&t, row, &path)?).or_default();
            let (n, sum) = s.dtw.get_or_insert((0, 0.0));
            if cell(&t, row, "status")? == "aligned" {
                *n += 1;
                *sum += cell(&t, row, "normalized_distance")?
                    .parse::<f64>()
                    .unwrap_or(0.0);
            }
        }
    }
    if let Some(path) = find_table(dir, "conceptmap_stats", ext) {
        found += 1;
        run.read_input(&path)?;
        let t = TextTable::read(&path)?;
        for row in &t.rows {
            if cell(&t, row, "comparison")? != "partners" {
                continue;
            }
            let s = sessions.entry(session_key(&t, row, &path)?).or_default();
            s.concepts = Some(
                [
                    "shared_concepts",
                    "non_isolated_shared_concepts",
                    "shared_links",
                    "mean_betweenness",
                ]
                .map(|c| cell(&t, row, c).unwrap_or_default().to_string()),
            );
        }
    }
    if found == 0 {
        bail!("no analysis outputs found in {}", dir.display());
    }

    let mut summary = Table::new(&SUMMARY_COLUMNS);
    for ((dyad, idx), s) in &sessions {
        let words = |k: usize| -> Cell { s.speakers.get(k).map(|sp| s.words[sp]).into() };
        let slices = (!s.slices.is_empty()).then_some(s.slices.len());
        let mut row: Vec<Cell> = vec![
            dyad.clone().into(),
            (*idx).into(),
            slices.into(),
            s.speakers.first().cloned().into(),
            s.speakers.get(1).cloned().into(),
            words(0),
            words(1),
            s.converged.map(|c| c.0).into(),
            s.converged.map(|c| c.1).into(),
            s.composite.into(),
            s.granger_significant.into(),
            s.dtw.map(|d| d.0).into(),
            s.dtw
                .and_then(|(n, sum)| (n > 0).then(|| sum / n as f64))
                .into(),
        ];
        match &s.concepts {
            Some(values) => row.extend(values.iter().map(|v| {
                if v.is_empty() {
                    Cell::Empty
                } else {
                    numeric(v)
                }
            })),
            None => row.extend(std::iter::repeat_n(Cell::Empty, 4)),
        }
        summary.push(row);
    }
    run.write_table("report/summary", &summary)?;
    if !long.rows.is_empty() {
        run.write_table("report/features_long", &long)?;
    }
    run.finish()
}

fn numeric(v: &str) -> Cell {
    v.parse::<i64>()
        .map(Cell::Int)
        .or_else(|_| v.parse::<f64>().map(Cell::Float))
        .unwrap_or_else(|_| v.into())
}

/// Columns of `report/summary`, in order.
pub const SUMMARY_COLUMNS: [&str; 17] = [
    "dyad",
    "session",
    "slices",
    "speaker_a",
    "speaker_b",
    "words_a",
    "words_b",
    "features_converged",
    "features_tested",
    "composite_strength",
    "granger_significant",
    "strategies_aligned",
    "mean_dtw_normalized",
    "shared_concepts",
    "non_isolated_shared_concepts",
    "shared_links",
    "mean_betweenness",
];
