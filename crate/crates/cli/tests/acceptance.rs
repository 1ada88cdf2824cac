//! Acceptance suite. Each criterion runs in turn and prints one line:
//! `PASS` or `FAIL`, its number, a short title, the elapsed time and the
//! measured quantities. The process exits non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::num::NonZeroUsize;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use dyad::align::{dtw, DtwOptions};
use dyad::conceptnet::{betweenness, build_map, intersect, ConceptMap, Lexicon};
use dyad::corpus::{Slice, Utterance, SLICE_WIDTH};
use dyad::paraling::{Feature, FeatureTable};
use dyad::stats::{f_cdf, paired_t, pearson, point_biserial, spearman};
use dyad::synth::rng::SynthRng;
use dyad::synth::{gen_random_session, gen_rapport_driven, PlantedCausality, SynthSpec};
use dyad::tsa::{adf_test, granger_causes, AdfSpec, CriticalValueTable, Deterministic};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_adf_calibration() -> Outcome {
    let start = Instant::now();
    let spec = AdfSpec::default();
    let mut walks_converged = 0;
    let mut noise_converged = 0;
    for seed in 0..100 {
        let mut rng = SynthRng::with_stream(seed, 1);
        let mut level = 0.0;
        let walk: Vec<f64> = (0..120)
            .map(|_| {
                level += rng.normal();
                level
            })
            .collect();
        let noise: Vec<f64> = (0..120).map(|_| rng.normal()).collect();
        walks_converged +=
            usize::from(adf_test(&walk, &spec).map_err(|e| e.to_string())?.converged);
        noise_converged += usize::from(
            adf_test(&noise, &spec)
                .map_err(|e| e.to_string())?
                .converged,
        );
    }
    let elapsed = start.elapsed();
    check(
        walks_converged <= 5 && noise_converged >= 95 && elapsed < Duration::from_secs(10),
        format!("random walks converged {walks_converged}/100, white noise converged {noise_converged}/100"),
    )
}

fn c2_critical_values() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("df_drift_trend.json");
    let sizes = [1000];
    let start = Instant::now();
    let table =
        CriticalValueTable::load_or_simulate(&path, Deterministic::DriftTrend, &sizes, 100_000, 7)
            .map_err(|e| e.to_string())?;
    let simulated = start.elapsed();
    let start = Instant::now();
    let cached =
        CriticalValueTable::load_or_simulate(&path, Deterministic::DriftTrend, &sizes, 100_000, 7)
            .map_err(|e| e.to_string())?;
    let reloaded = start.elapsed();
    let [one, five, _] = table.values[0];
    check(
        (one + 3.96).abs() <= 0.05
            && (five + 3.41).abs() <= 0.05
            && simulated < Duration::from_secs(120)
            && cached == table
            && reloaded < Duration::from_secs(1),
        format!(
            "1% {one:.4}, 5% {five:.4}; simulated in {:.1} s, cached reload {:.3} s",
            simulated.as_secs_f64(),
            reloaded.as_secs_f64()
        ),
    )
}

fn granger_hits(strength: f64, reverse: bool) -> Result<usize, String> {
    let mut hits = 0;
    for seed in 0..100 {
        let spec = SynthSpec {
            seed,
            n_slices: 120,
            planted_causality: Some(PlantedCausality { strength, lag: 1 }),
            ..SynthSpec::default()
        };
        let (rapport, diff) = gen_rapport_driven(&spec).map_err(|e| e.to_string())?;
        let result = if reverse {
            granger_causes(&rapport, &diff, 3)
        } else {
            granger_causes(&diff, &rapport, 3)
        };
        hits += usize::from(result.map_err(|e| e.to_string())?.significant);
    }
    Ok(hits)
}

fn c3_granger_calibration() -> Outcome {
    let planted = granger_hits(0.8, false)?;
    let independent = granger_hits(0.0, false)?;
    let reverse = granger_hits(0.8, true)?;
    check(
        planted >= 90 && (2..=8).contains(&independent) && (2..=8).contains(&reverse),
        format!("planted {planted}/100, independent {independent}/100, reverse {reverse}/100"),
    )
}

/// Minimum over every monotone path of steps (1,0), (0,1), (1,1) from the
/// first pair, with diagonal steps and the first cell weighted twice.
fn dtw_enumerated(a: &[f64], b: &[f64], open_end: bool) -> f64 {
    fn walk(a: &[f64], b: &[f64], i: usize, j: usize, cost: f64, open_end: bool, best: &mut f64) {
        let d = |i: usize, j: usize| (a[i] - b[j]).abs();
        if i + 1 == a.len() && (open_end || j + 1 == b.len()) {
            *best = best.min(cost);
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, cost + d(i + 1, j), open_end, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, cost + d(i, j + 1), open_end, best);
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(
                a,
                b,
                i + 1,
                j + 1,
                cost + 2.0 * d(i + 1, j + 1),
                open_end,
                best,
            );
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 2.0 * (a[0] - b[0]).abs(), open_end, &mut best);
    best
}

fn random_times(rng: &mut SynthRng, max_len: u64) -> Vec<f64> {
    let len = rng.range(1, max_len) as usize;
    let mut v: Vec<f64> = (0..len).map(|_| rng.range(0, 60) as f64).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn c4_dtw_oracle() -> Outcome {
    let mut rng = SynthRng::new(4);
    let mut mismatches = 0;
    for _ in 0..500 {
        let a = random_times(&mut rng, 6);
        let b = random_times(&mut rng, 6);
        for open_end in [false, true] {
            let got = dtw(&a, &b, DtwOptions { open_end })
                .map_err(|e| e.to_string())?
                .raw_distance;
            if got != dtw_enumerated(&a, &b, open_end) {
                mismatches += 1;
            }
        }
    }
    check(
        mismatches == 0,
        format!("{mismatches} mismatches over 500 instances, open and closed end"),
    )
}

fn c5_dtw_parameters() -> Outcome {
    let mut failures = Vec::new();
    let a = [2.0, 17.5, 31.0, 64.0];
    if dtw(&a, &a, DtwOptions::default())
        .map_err(|e| e.to_string())?
        .normalized_distance
        != 0.0
    {
        failures.push("identical series".to_string());
    }
    let single = dtw(&[0.0], &[1.0], DtwOptions::default()).map_err(|e| e.to_string())?;
    if single.raw_distance != 2.0 || single.normalized_distance != 1.0 {
        failures.push(format!(
            "single points gave {} / {}",
            single.raw_distance, single.normalized_distance
        ));
    }
    let mut rng = SynthRng::new(5);
    let mut worse = 0;
    for _ in 0..100 {
        let a: Vec<f64> = random_times(&mut rng, 11);
        let b: Vec<f64> = random_times(&mut rng, 11);
        let open = dtw(&a, &b, DtwOptions { open_end: true }).map_err(|e| e.to_string())?;
        let closed = dtw(&a, &b, DtwOptions { open_end: false }).map_err(|e| e.to_string())?;
        if open.raw_distance > closed.raw_distance {
            worse += 1;
        }
    }
    if worse > 0 {
        failures.push(format!("open end exceeded full match on {worse}/100 pairs"));
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            "identical 0, single points 1, open end <= full match on 100/100".into()
        } else {
            failures.join("; ")
        },
    )
}

const VOCAB: [&str; 7] = [
    "add", "number", "side", "equation", "divide", "variable", "answer",
];

/// Counts every ordered pair of positions at most `window` apart inside one
/// block of `stop` sentences.
fn map_enumerated(sentences: &[Vec<String>], window: usize, stop: usize) -> ConceptMap {
    let positions: Vec<(usize, &String)> = sentences
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s.iter().map(move |t| (i / stop, t)))
        .collect();
    let mut counts: HashMap<(String, String), u64> = HashMap::new();
    for (k, (block_k, src)) in positions.iter().enumerate() {
        for (l, (block_l, dst)) in positions.iter().enumerate() {
            if l > k && l - k <= window && block_k == block_l && src != dst {
                *counts.entry(((*src).clone(), (*dst).clone())).or_default() += 1;
            }
        }
    }
    ConceptMap::from_parts(
        positions.iter().map(|p| p.1.clone()),
        counts.into_iter().map(|((s, t), w)| (s, t, w)),
    )
}

fn random_stream(rng: &mut SynthRng) -> (Vec<Vec<String>>, usize, usize) {
    let stop = rng.range(1, 4) as usize;
    let window = rng.range(1, 11) as usize;
    let n_sentences = rng.range(1, 3 * stop as u64) as usize;
    let mut budget = 50;
    let sentences = (0..n_sentences)
        .map(|_| {
            let len = (rng.range(0, 8) as usize).min(budget);
            budget -= len;
            (0..len)
                .map(|_| VOCAB[rng.range(0, VOCAB.len() as u64 - 1) as usize].to_string())
                .collect()
        })
        .collect();
    (sentences, window, stop)
}

fn random_map(rng: &mut SynthRng) -> ConceptMap {
    let nodes: Vec<String> = VOCAB
        .iter()
        .filter(|_| rng.bernoulli(0.7))
        .map(|w| w.to_string())
        .collect();
    let mut edges = Vec::new();
    for s in &nodes {
        for t in &nodes {
            if s != t && rng.bernoulli(0.4) {
                edges.push((s.clone(), t.clone(), rng.range(1, 4)));
            }
        }
    }
    ConceptMap::from_parts(nodes, edges)
}

/// Betweenness by enumerating every shortest path between every ordered pair.
fn betweenness_enumerated(adj: &[Vec<bool>]) -> Vec<f64> {
    let n = adj.len();
    let mut dist = vec![vec![usize::MAX; n]; n];
    for (s, row) in dist.iter_mut().enumerate() {
        row[s] = 0;
        let mut frontier = vec![s];
        let mut d = 0;
        while !frontier.is_empty() {
            d += 1;
            let mut next = Vec::new();
            for &u in &frontier {
                for v in 0..n {
                    if adj[u][v] && row[v] == usize::MAX {
                        row[v] = d;
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
    }
    fn paths(
        adj: &[Vec<bool>],
        path: &mut Vec<usize>,
        target: usize,
        len: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        let u = *path.last().expect("non-empty path");
        if path.len() - 1 == len {
            if u == target {
                out.push(path.clone());
            }
            return;
        }
        for v in 0..adj.len() {
            if adj[u][v] && !path.contains(&v) {
                path.push(v);
                paths(adj, path, target, len, out);
                path.pop();
            }
        }
    }
    let mut score = vec![0.0; n];
    for s in 0..n {
        for t in 0..n {
            if s == t || dist[s][t] == usize::MAX {
                continue;
            }
            let mut found = Vec::new();
            paths(adj, &mut vec![s], t, dist[s][t], &mut found);
            for (v, sc) in score.iter_mut().enumerate() {
                if v != s && v != t {
                    let through = found.iter().filter(|p| p.contains(&v)).count();
                    *sc += through as f64 / found.len() as f64;
                }
            }
        }
    }
    score
}

fn c6_concept_oracles() -> Outcome {
    let mut rng = SynthRng::new(6);
    let mut build_bad = 0;
    for _ in 0..200 {
        let (sentences, window, stop) = random_stream(&mut rng);
        let got = build_map(
            &sentences,
            NonZeroUsize::new(window).expect("window >= 1"),
            NonZeroUsize::new(stop).expect("stop >= 1"),
        );
        if got != map_enumerated(&sentences, window, stop) {
            build_bad += 1;
        }
    }
    let mut intersect_bad = 0;
    for _ in 0..200 {
        let (a, b) = (random_map(&mut rng), random_map(&mut rng));
        if intersect(&a, &a) != a
            || intersect(&b, &b) != b
            || intersect(&a, &b) != intersect(&b, &a)
        {
            intersect_bad += 1;
        }
    }
    let mut between_bad = 0;
    for _ in 0..200 {
        let n = rng.range(1, 6) as usize;
        let p = rng.uniform();
        let adj: Vec<Vec<bool>> = (0..n)
            .map(|i| (0..n).map(|j| i != j && rng.bernoulli(p)).collect())
            .collect();
        let names: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (0..n).filter(|&j| adj[i][j]) {
                edges.push((names[i].clone(), names[j].clone(), rng.range(1, 3)));
            }
        }
        let got = betweenness(&ConceptMap::from_parts(names.clone(), edges));
        let want = betweenness_enumerated(&adj);
        if names
            .iter()
            .zip(&want)
            .any(|(name, w)| (got[name] - w).abs() > 1e-9)
        {
            between_bad += 1;
        }
    }
    check(
        build_bad + intersect_bad + between_bad == 0,
        format!(
            "mismatches: build {build_bad}/200, intersect laws {intersect_bad}/200, betweenness {between_bad}/200"
        ),
    )
}

fn c7_micro_examples() -> Outcome {
    let lex = Lexicon::default();
    let forms: Vec<String> = ["adds", "adding", "added"]
        .iter()
        .map(|w| lex.generalize(w))
        .collect();
    let window = NonZeroUsize::new(10).expect("nonzero");
    let one = |words: &[&str]| vec![words.iter().map(|w| w.to_string()).collect::<Vec<_>>()];
    let forward = build_map(&one(&["add", "number"]), window, window);
    let reversed = build_map(&one(&["number", "add"]), window, window);
    let shared = intersect(&forward, &reversed);
    let rejected = shared.edges().is_empty() && shared.nodes().len() == 2;
    check(
        forms.iter().all(|f| f == "add") && rejected,
        format!(
            "adds/adding/added -> {forms:?}; reversed edge shared: {}",
            !shared.edges().is_empty()
        ),
    )
}

fn pearson_direct(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

/// `1 − 6 Σ d² / (n (n² − 1))` on tie-free data.
fn spearman_direct(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64]| {
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        for (pos, &i) in order.iter().enumerate() {
            r[i] = (pos + 1) as f64;
        }
        r
    };
    let (rx, ry) = (rank(x), rank(y));
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

/// `(M₁ − M₀) / s · √(p q)` with the population standard deviation `s`.
fn point_biserial_direct(binary: &[f64], y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let ones: Vec<f64> = binary
        .iter()
        .zip(y)
        .filter(|(g, _)| **g == 1.0)
        .map(|(_, v)| *v)
        .collect();
    let zeros: Vec<f64> = binary
        .iter()
        .zip(y)
        .filter(|(g, _)| **g == 0.0)
        .map(|(_, v)| *v)
        .collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let m = mean(y);
    let s = (y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
    let (p, q) = (ones.len() as f64 / n, zeros.len() as f64 / n);
    (mean(&ones) - mean(&zeros)) / s * (p * q).sqrt()
}

fn c8_statistics() -> Outcome {
    let mut rng = SynthRng::new(8);
    let mut worst: f64 = 0.0;
    let mut df_bad = 0;
    for _ in 0..100 {
        let n = rng.range(5, 59) as usize;
        let x: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.6 * v + rng.normal()).collect();
        let mut g: Vec<f64> = (0..n)
            .map(|_| if rng.bernoulli(0.5) { 1.0 } else { 0.0 })
            .collect();
        g[0] = 0.0;
        g[1] = 1.0;
        let p = pearson(&x, &y).map_err(|e| e.to_string())?.coefficient;
        let s = spearman(&x, &y).map_err(|e| e.to_string())?.coefficient;
        let b = point_biserial(&g, &y)
            .map_err(|e| e.to_string())?
            .coefficient;
        worst = worst
            .max((p - pearson_direct(&x, &y)).abs())
            .max((s - spearman_direct(&x, &y)).abs())
            .max((b - point_biserial_direct(&g, &y)).abs());
        if paired_t(&x, &y).map_err(|e| e.to_string())?.df != n - 1 {
            df_bad += 1;
        }
    }
    let mut f_worst: f64 = 0.0;
    for d in 1..=200 {
        let d = f64::from(d);
        f_worst = f_worst.max((f_cdf(1.0, d, d).map_err(|e| e.to_string())? - 0.5).abs());
    }
    check(
        worst <= 1e-12 && f_worst <= 1e-9 && df_bad == 0,
        format!("max correlation error {worst:.1e}, max |f_cdf(1,d,d) - 0.5| {f_worst:.1e}, paired df mismatches {df_bad}"),
    )
}

fn dyad(cwd: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_dyad"))
        .current_dir(cwd)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "`dyad {}` failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn pipeline(cwd: &Path) -> Result<(), String> {
    let steps: [&[&str]; 10] = [
        &[
            "--out",
            "corpus",
            "--seed",
            "2024",
            "synth",
            "--dyads",
            "5",
            "--sessions",
            "2",
        ],
        &["--out", "out", "features", "corpus/sessions"],
        &["--out", "out", "converge", "corpus/sessions"],
        &["--out", "out", "strength", "corpus/sessions"],
        &["--out", "out", "granger", "corpus/sessions"],
        &["--out", "out", "dtw", "--paths", "corpus/sessions"],
        &["--out", "out", "conceptmap", "build", "corpus/sessions"],
        &["--out", "out", "conceptmap", "stats", "corpus/sessions"],
        &["--out", "out", "report"],
        &[
            "--out",
            "out",
            "correlate",
            "out/report/summary.csv",
            "--x",
            "composite_strength",
            "--y",
            "shared_links",
        ],
    ];
    steps.iter().try_for_each(|args| dyad(cwd, args))
}

fn tree(root: &Path) -> Result<BTreeMap<PathBuf, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    let mut pending = vec![root.to_path_buf()];
    while let Some(dir) = pending.pop() {
        for entry in std::fs::read_dir(&dir).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                pending.push(path);
            } else {
                let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
                files.insert(
                    path.strip_prefix(root).expect("under root").to_path_buf(),
                    bytes,
                );
            }
        }
    }
    Ok(files)
}

fn c9_determinism() -> Outcome {
    let start = Instant::now();
    let (first, second) = (
        tempfile::tempdir().map_err(|e| e.to_string())?,
        tempfile::tempdir().map_err(|e| e.to_string())?,
    );
    pipeline(first.path())?;
    pipeline(second.path())?;
    let elapsed = start.elapsed();
    let (a, b) = (tree(first.path())?, tree(second.path())?);
    let sessions = a
        .keys()
        .filter(|p| p.starts_with("corpus/sessions"))
        .count();
    let differing: BTreeSet<&PathBuf> = a
        .keys()
        .chain(b.keys())
        .filter(|p| a.get(*p) != b.get(*p))
        .collect();
    check(
        sessions == 10 && differing.is_empty() && elapsed < Duration::from_secs(60),
        format!(
            "{sessions} sessions, {} files per run, {} differing, both runs in {:.1} s",
            a.len(),
            differing.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn c10_conservation() -> Outcome {
    let crossed = |u: &Utterance, slices: &[Slice]| {
        slices
            .iter()
            .filter(|s| u.fraction_in(s) > 0.0)
            .count()
            .saturating_sub(1) as f64
    };
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let session = gen_random_session(seed, 30);
        let table = FeatureTable::compute(&session, SLICE_WIDTH).map_err(|e| e.to_string())?;
        for (k, speaker) in session.speakers().iter().enumerate() {
            let total: f64 = session
                .utterances_by(speaker)
                .map(|u| f64::from(u.words()))
                .sum();
            let bound: f64 = session
                .utterances_by(speaker)
                .map(|u| crossed(u, &table.slices))
                .sum();
            let sliced: f64 = table.values(k, Feature::Words).iter().sum();
            worst = worst.max((sliced - total).abs());
            if (sliced - total).abs() > bound {
                violations += 1;
            }
        }
    }
    check(
        violations == 0,
        format!("{violations} speaker totals outside the bound, largest gap {worst} words"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("ADF calibration", c1_adf_calibration),
        ("ADF critical values", c2_critical_values),
        ("Granger calibration", c3_granger_calibration),
        ("DTW oracle equivalence", c4_dtw_oracle),
        ("DTW parameter checks", c5_dtw_parameters),
        ("concept-map oracles", c6_concept_oracles),
        ("concept-map micro-examples", c7_micro_examples),
        ("statistics oracles", c8_statistics),
        ("end-to-end determinism", c9_determinism),
        ("feature conservation", c10_conservation),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (title, criterion)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(criterion)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {:>2} {title} ({secs:.2} s): {detail}", i + 1);
    }
    println!(
        "\nacceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
