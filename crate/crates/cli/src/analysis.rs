use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::output::{load_sessions, session_stem, sha256_hex, write_atomic, Cell, Run, Table};
use crate::{Encoding, UsageError};
use dyad::align::StrategyAlignment;
use dyad::corpus::{to_json, to_tsv, StrategyKind};
use dyad::paraling::{Feature, FeatureTable};
use dyad::synth::{gen_corpus, SynthSpec};
use dyad::tsa::{
    adf_test, convergence_strength, difference, granger_causes, AdfResult, GrangerResult, TsaError,
};
use dyad::{strategy_alignment, AlignError, DtwOptions, Session};

fn key_cells(s: &Session) -> Vec<Cell> {
    vec![s.dyad_id().into(), s.session_index().into()]
}

fn features_of(cfg: &RunConfig, s: &Session) -> Result<FeatureTable> {
    FeatureTable::compute(s, cfg.slice_width).with_context(|| {
        format!(
            "stage `features`, session {} #{}",
            s.dyad_id(),
            s.session_index()
        )
    })
}

fn partner_difference(cfg: &RunConfig, table: &FeatureTable, feature: Feature) -> Result<Vec<f64>> {
    let d = difference(
        &table.values(0, feature),
        &table.values(1, feature),
        cfg.diff_lag,
    )?;
    Ok(d.to_vec())
}

pub fn features(cfg: &RunConfig, inputs: &[PathBuf]) -> Result<()> {
    let mut run = Run::new(cfg, "features");
    let sessions = load_sessions(&mut run, inputs)?;
    let written: Vec<(String, String)> = sessions
        .par_iter()
        .map(|s| -> Result<(String, String)> {
            let ft = features_of(cfg, s)?;
            let mut table = Table::new(&[
                "dyad",
                "session",
                "slice",
                "start",
                "end",
                "speaker",
                "words",
                "message_density",
                "content_density",
                "overlaps",
                "laughter",
            ]);
            for (i, slice) in ft.slices.iter().enumerate() {
                for k in 0..2 {
                    let v = &ft.vectors[k][i];
                    let mut row = key_cells(s);
                    row.extend([
                        slice.index.into(),
                        slice.start.into(),
                        slice.end.into(),
                        ft.speakers[k].clone().into(),
                        v.words.into(),
                        v.message_density.into(),
                        v.content_density.into(),
                        v.overlaps.into(),
                        v.laughter.into(),
                    ]);
                    table.push(row);
                }
            }
            let name = format!("features/{}.{}", session_stem(s), cfg.format.extension());
            let bytes = table.render(cfg.format)?;
            write_atomic(&run_path(cfg, &name), &bytes)?;
            Ok((name, sha256_hex(&bytes)))
        })
        .collect::<Result<_>>()?;
    for (name, digest) in written {
        run.record_output(name, digest);
    }
    run.finish()
}

fn run_path(cfg: &RunConfig, relative: &str) -> PathBuf {
    cfg.out.join(relative)
}

enum AdfOutcome {
    Ok(AdfResult),
    Skipped(&'static str),
}

fn adf_outcome(cfg: &RunConfig, diff: &[f64]) -> Result<AdfOutcome> {
    match adf_test(diff, &cfg.adf_spec()) {
        Ok(r) => Ok(AdfOutcome::Ok(r)),
        Err(TsaError::Degenerate | TsaError::Ols(_)) => Ok(AdfOutcome::Skipped("degenerate")),
        Err(TsaError::TooShort { .. }) => Ok(AdfOutcome::Skipped("too_short")),
        Err(e) => Err(e.into()),
    }
}

/// ADF outcome for every session and feature, in session then feature order.
fn convergence_tests(
    cfg: &RunConfig,
    sessions: &[Session],
) -> Result<Vec<Vec<(Feature, AdfOutcome)>>> {
    sessions
        .par_iter()
        .map(|s| {
            let ft = features_of(cfg, s)?;
            Feature::ALL
                .into_iter()
                .map(|f| {
                    let d = partner_difference(cfg, &ft, f)?;
                    let outcome = adf_outcome(cfg, &d).with_context(|| {
                        format!(
                            "stage `converge`, session {} #{}, {f}",
                            s.dyad_id(),
                            s.session_index()
                        )
                    })?;
                    Ok((f, outcome))
                })
                .collect()
        })
        .collect()
}

pub fn converge(cfg: &RunConfig, inputs: &[PathBuf]) -> Result<()> {
    let mut run = Run::new(cfg, "converge");
    let sessions = load_sessions(&mut run, inputs)?;
    let tests = convergence_tests(cfg, &sessions)?;
    let mut table = Table::new(&[
        "dyad",
        "session",
        "feature",
        "status",
        "statistic",
        "critical_value",
        "gamma",
        "nobs",
        "converged",
    ]);
    for (s, outcomes) in sessions.iter().zip(tests) {
        for (f, outcome) in outcomes {
            let mut row = key_cells(s);
            row.push(f.as_str().into());
            match outcome {
                AdfOutcome::Ok(r) => row.extend([
                    "ok".into(),
                    r.statistic.into(),
                    r.critical_value.into(),
                    r.gamma.into(),
                    r.nobs.into(),
                    r.converged.into(),
                ]),
                AdfOutcome::Skipped(why) => {
                    row.push(why.into());
                    row.extend(std::iter::repeat_n(Cell::Empty, 5));
                }
            }
            table.push(row);
        }
    }
    run.write_table("converge", &table)?;
    run.finish()
}

pub fn strength(cfg: &RunConfig, inputs: &[PathBuf]) -> Result<()> {
    let mut run = Run::new(cfg, "strength");
    let sessions = load_sessions(&mut run, inputs)?;
    let tests = convergence_tests(cfg, &sessions)?;
    let mut statistics = BTreeMap::new();
    for (idx, outcomes) in tests.iter().enumerate() {
        for (f, outcome) in outcomes {
            if let AdfOutcome::Ok(r) = outcome {
                statistics.insert((*f, idx), r.statistic);
            }
        }
    }
    let scores = convergence_strength(&statistics).context("stage `strength`")?;
    let mut columns = vec!["dyad", "session"];
    columns.extend(Feature::ALL.iter().map(|f| f.as_str()));
    columns.push("composite");
    let mut table = Table::new(&columns);
    for (idx, s) in sessions.iter().enumerate() {
        let mut row = key_cells(s);
        match scores.get(&idx) {
            Some(score) => {
                row.extend(
                    Feature::ALL
                        .iter()
                        .map(|f| Cell::from(score.per_feature.get(f).copied())),
                );
                row.push(score.composite.into());
            }
            None => row.extend(std::iter::repeat_n(Cell::Empty, Feature::ALL.len() + 1)),
        }
        table.push(row);
    }
    run.write_table("strength", &table)?;
    run.finish()
}

fn granger_status(
    result: Result<GrangerResult, TsaError>,
) -> Result<(Option<GrangerResult>, &'static str)> {
    match result {
        Ok(r) => Ok((Some(r), "ok")),
        Err(TsaError::TooShort { .. }) => Ok((None, "too_short")),
        Err(TsaError::Degenerate | TsaError::Ols(_)) => Ok((None, "degenerate")),
        Err(e) => Err(e.into()),
    }
}

pub fn granger(cfg: &RunConfig, inputs: &[PathBuf], effect: Feature, cause: &str) -> Result<()> {
    let cause_feature = match cause {
        "rapport" => None,
        other => Some(
            other
                .parse::<Feature>()
                .map_err(|e| UsageError(format!("--cause: {e}")))?,
        ),
    };
    let mut run = Run::new(cfg, "granger");
    let sessions = load_sessions(&mut run, inputs)?;
    let effect_name = format!("diff:{effect}");
    let cause_name = cause_feature.map_or("rapport".to_string(), |f| format!("diff:{f}"));
    let rows: Vec<Vec<Vec<Cell>>> = sessions
        .par_iter()
        .map(|s| -> Result<Vec<Vec<Cell>>> {
            let ft = features_of(cfg, s)?;
            let e = partner_difference(cfg, &ft, effect)?;
            let c = match cause_feature {
                Some(f) => Some(partner_difference(cfg, &ft, f)?),
                None => s
                    .rapport_series(ft.slices.len())
                    .map(|r| r[cfg.diff_lag..].to_vec()),
            };
            let mut out = Vec::new();
            for (from, to, forward) in [
                (&cause_name, &effect_name, true),
                (&effect_name, &cause_name, false),
            ] {
                let mut row = key_cells(s);
                row.extend([from.clone().into(), to.clone().into()]);
                let (result, status) = match &c {
                    None => (None, "no_rapport"),
                    Some(c) => {
                        let r = if forward {
                            granger_causes(&e, c, cfg.granger_lags)
                        } else {
                            granger_causes(c, &e, cfg.granger_lags)
                        };
                        granger_status(r).with_context(|| {
                            format!(
                                "stage `granger`, session {} #{}",
                                s.dyad_id(),
                                s.session_index()
                            )
                        })?
                    }
                };
                row.push(status.into());
                match result {
                    Some(r) => row.extend([
                        r.f_statistic.into(),
                        r.p_value.into(),
                        r.df_num.into(),
                        r.df_den.into(),
                        r.significant.into(),
                        r.cause_dropped.into(),
                    ]),
                    None => row.extend(std::iter::repeat_n(Cell::Empty, 6)),
                }
                out.push(row);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(&[
        "dyad",
        "session",
        "cause",
        "effect",
        "status",
        "f_statistic",
        "p_value",
        "df_num",
        "df_den",
        "significant",
        "cause_dropped",
    ]);
    for row in rows.into_iter().flatten() {
        table.push(row);
    }
    run.write_table("granger", &table)?;
    run.finish()
}

pub fn dtw(cfg: &RunConfig, inputs: &[PathBuf], paths: bool) -> Result<()> {
    let mut run = Run::new(cfg, "dtw");
    let sessions = load_sessions(&mut run, inputs)?;
    let opts = DtwOptions {
        open_end: cfg.open_end,
    };
    let mut table = Table::new(&[
        "dyad",
        "session",
        "strategy",
        "status",
        "speaker_a",
        "speaker_b",
        "n",
        "m",
        "raw_distance",
        "normalized_distance",
        "matched_end",
    ]);
    for s in &sessions {
        for kind in StrategyKind::ALL {
            let mut row = key_cells(s);
            row.push(kind.as_str().into());
            match strategy_alignment(s, kind, opts) {
                Ok(StrategyAlignment::Aligned { a, b, result }) => {
                    row.extend([
                        "aligned".into(),
                        a.speaker.clone().into(),
                        b.speaker.clone().into(),
                        result.n.into(),
                        result.m.into(),
                        result.raw_distance.into(),
                        result.normalized_distance.into(),
                        result.matched_end.into(),
                    ]);
                    if paths {
                        let mut pt = Table::new(&["step", "i", "j", "a_time", "b_time"]);
                        for (step, &(i, j)) in result.path.iter().enumerate() {
                            pt.push(vec![
                                step.into(),
                                i.into(),
                                j.into(),
                                a.timestamps[i].into(),
                                b.timestamps[j].into(),
                            ]);
                        }
                        run.write_table(
                            &format!("dtw_paths/{}_{}", session_stem(s), kind.as_str()),
                            &pt,
                        )?;
                    }
                }
                Ok(StrategyAlignment::InsufficientEvents { a, b }) => {
                    row.extend([
                        "insufficient_events".into(),
                        a.speaker.into(),
                        b.speaker.into(),
                        a.timestamps.len().into(),
                        b.timestamps.len().into(),
                    ]);
                    row.extend(std::iter::repeat_n(Cell::Empty, 3));
                }
                Err(e @ (AlignError::MissingTrack | AlignError::EmptySeries)) => {
                    row.push(
                        if matches!(e, AlignError::MissingTrack) {
                            "missing_track"
                        } else {
                            "no_events"
                        }
                        .into(),
                    );
                    row.extend(std::iter::repeat_n(Cell::Empty, 7));
                }
                Err(e) => {
                    return Err(e).with_context(|| {
                        format!(
                            "stage `dtw`, session {} #{}, {kind}",
                            s.dyad_id(),
                            s.session_index()
                        )
                    })
                }
            }
            table.push(row);
        }
    }
    run.write_table("dtw", &table)?;
    run.finish()
}

pub fn synth(
    cfg: &RunConfig,
    dyads: usize,
    sessions: u8,
    slices: usize,
    divergent: bool,
    math_text: bool,
    encoding: Encoding,
) -> Result<()> {
    if dyads == 0 || sessions == 0 {
        return Err(UsageError("--dyads and --sessions must be at least 1".into()).into());
    }
    if sessions > dyad::corpus::MAX_SESSION_INDEX {
        return Err(UsageError(format!(
            "--sessions must be at most {}",
            dyad::corpus::MAX_SESSION_INDEX
        ))
        .into());
    }
    let spec = SynthSpec {
        seed: cfg.seed,
        n_slices: slices,
        convergent: !divergent,
        math_text,
        ..SynthSpec::default()
    };
    let corpus = gen_corpus(&spec, dyads, sessions).map_err(|e| UsageError(e.to_string()))?;
    let mut run = Run::new(cfg, "synth");
    for s in &corpus {
        let (ext, text) = match encoding {
            Encoding::Tsv => ("tsv", to_tsv(s)),
            Encoding::Json => ("json", to_json(s)),
        };
        run.write(
            &format!("sessions/{}.{ext}", session_stem(s)),
            text.as_bytes(),
        )?;
    }
    if corpus.is_empty() {
        bail!("empty corpus");
    }
    run.finish()
}
