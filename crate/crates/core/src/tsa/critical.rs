//! Dickey-Fuller critical values by Monte Carlo simulation.
//!
//! Under the unit-root null, the test regression is fitted to Gaussian random
//! walks and the lower quantiles of the `γ̂ / se(γ̂)` statistic are recorded.
//! The embedded tables were produced by [`simulate_table`] with
//! [`EMBEDDED_REPLICATIONS`] replications per size and seed
//! [`EMBEDDED_SEED`]; `embedded_tables_reproduce` in the tests regenerates a
//! subset of the entries. Sizes are regression rows; lookups interpolate
//! linearly in `1/n` and clamp outside the tabulated range.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Deterministic, Significance, TsaError};
use crate::synth::rng::SynthRng;

pub const TABLE_SIZES: [usize; 6] = [25, 50, 100, 250, 500, 1000];
pub const EMBEDDED_REPLICATIONS: usize = 100_000;
pub const EMBEDDED_SEED: u64 = 0xDF_2024;

/// Quantiles of the Dickey-Fuller statistic, one row per sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalValueTable {
    pub deterministic: Deterministic,
    pub replications: usize,
    pub seed: u64,
    pub sizes: Vec<usize>,
    /// `values[i]` holds the 1%, 5% and 10% quantiles for `sizes[i]`.
    pub values: Vec<[f64; 3]>,
}

impl CriticalValueTable {
    pub fn embedded(deterministic: Deterministic) -> Self {
        let values = match deterministic {
            Deterministic::None => EMBEDDED_NONE,
            Deterministic::Drift => EMBEDDED_DRIFT,
            Deterministic::DriftTrend => EMBEDDED_DRIFT_TREND,
        };
        Self {
            deterministic,
            replications: EMBEDDED_REPLICATIONS,
            seed: EMBEDDED_SEED,
            sizes: TABLE_SIZES.to_vec(),
            values: values.to_vec(),
        }
    }

    /// Critical value at `significance` for `n` regression rows.
    pub fn lookup(&self, significance: Significance, n: usize) -> f64 {
        let col = significance.column();
        let first = self.sizes[0];
        let last = *self.sizes.last().expect("non-empty table");
        if n <= first {
            return self.values[0][col];
        }
        if n >= last {
            return self.values[self.sizes.len() - 1][col];
        }
        let hi = self
            .sizes
            .iter()
            .position(|&s| s >= n)
            .expect("n inside range");
        let lo = hi - 1;
        let inv = |s: usize| 1.0 / s as f64;
        let w = (inv(self.sizes[lo]) - inv(n)) / (inv(self.sizes[lo]) - inv(self.sizes[hi]));
        self.values[lo][col] + w * (self.values[hi][col] - self.values[lo][col])
    }

    /// Reads a cached table when its parameters match, otherwise simulates
    /// one and writes it to `path` (temp file + rename).
    pub fn load_or_simulate(
        path: &Path,
        deterministic: Deterministic,
        sizes: &[usize],
        replications: usize,
        seed: u64,
    ) -> Result<Self, TsaError> {
        if let Ok(text) = fs::read_to_string(path) {
            if let Ok(table) = serde_json::from_str::<Self>(&text) {
                if table.deterministic == deterministic
                    && table.sizes == sizes
                    && table.replications == replications
                    && table.seed == seed
                {
                    return Ok(table);
                }
            }
        }
        let table = simulate_table(deterministic, sizes, replications, seed);
        let json = serde_json::to_string_pretty(&table).expect("table serializes");
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, json)
            .and_then(|_| fs::rename(&tmp, path))
            .map_err(|e| TsaError::Cache(format!("{}: {e}", path.display())))?;
        Ok(table)
    }
}

/// Critical value from the embedded tables.
pub fn critical_value(
    significance: f64,
    n: usize,
    deterministic: Deterministic,
) -> Result<f64, TsaError> {
    let level = Significance::try_from(significance)?;
    Ok(CriticalValueTable::embedded(deterministic).lookup(level, n))
}

/// Dickey-Fuller statistic on one simulated random walk with `n` rows.
fn df_statistic(deterministic: Deterministic, n: usize, rng: &mut SynthRng) -> f64 {
    let k = deterministic.terms() + 1;
    let gamma_col = k - 1;
    let mut xtx = [[0.0f64; 3]; 3];
    let mut xty = [0.0f64; 3];
    let mut yty = 0.0;
    let mut level = 0.0;
    let mut row = [0.0f64; 3];
    for t in 1..=n {
        let shock = rng.normal();
        let mut c = 0;
        if deterministic.terms() >= 1 {
            row[c] = 1.0;
            c += 1;
        }
        if deterministic.terms() == 2 {
            row[c] = t as f64 / n as f64;
            c += 1;
        }
        row[c] = level;
        for i in 0..k {
            xty[i] += row[i] * shock;
            for j in 0..k {
                xtx[i][j] += row[i] * row[j];
            }
        }
        yty += shock * shock;
        level += shock;
    }
    let inv = invert(&xtx, k);
    let beta: Vec<f64> = (0..k)
        .map(|i| (0..k).map(|j| inv[i][j] * xty[j]).sum())
        .collect();
    let fitted: f64 = (0..k).map(|i| beta[i] * xty[i]).sum();
    let rss = (yty - fitted).max(0.0);
    let s2 = rss / (n - k) as f64;
    beta[gamma_col] / (s2 * inv[gamma_col][gamma_col]).sqrt()
}

fn invert(m: &[[f64; 3]; 3], k: usize) -> [[f64; 3]; 3] {
    let mut a = *m;
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate().take(k) {
        row[i] = 1.0;
    }
    for c in 0..k {
        let p = (c..k)
            .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
            .expect("non-empty");
        a.swap(c, p);
        inv.swap(c, p);
        let piv = a[c][c];
        for j in 0..k {
            a[c][j] /= piv;
            inv[c][j] /= piv;
        }
        for r in 0..k {
            if r != c {
                let f = a[r][c];
                for j in 0..k {
                    a[r][j] -= f * a[c][j];
                    inv[r][j] -= f * inv[c][j];
                }
            }
        }
    }
    inv
}

/// Type-7 sample quantile of sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// 1%, 5% and 10% quantiles of the statistic for `n` rows. Replication `r`
/// draws from ChaCha stream `r` of `seed`, so results do not depend on the
/// thread count.
pub fn simulate_quantiles(
    deterministic: Deterministic,
    n: usize,
    replications: usize,
    seed: u64,
) -> [f64; 3] {
    let mut stats: Vec<f64> = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = SynthRng::with_stream(seed ^ (n as u64).rotate_left(32), r);
            df_statistic(deterministic, n, &mut rng)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    Significance::ALL.map(|s| quantile_sorted(&stats, s.level()))
}

pub fn simulate_table(
    deterministic: Deterministic,
    sizes: &[usize],
    replications: usize,
    seed: u64,
) -> CriticalValueTable {
    CriticalValueTable {
        deterministic,
        replications,
        seed,
        sizes: sizes.to_vec(),
        values: sizes
            .iter()
            .map(|&n| simulate_quantiles(deterministic, n, replications, seed))
            .collect(),
    }
}

const EMBEDDED_NONE: [[f64; 3]; 6] = [
    [-2.6461, -1.9405, -1.6016],
    [-2.6008, -1.9405, -1.6079],
    [-2.5952, -1.9570, -1.6231],
    [-2.5600, -1.9393, -1.6169],
    [-2.5672, -1.9344, -1.6171],
    [-2.5708, -1.9431, -1.6098],
];
const EMBEDDED_DRIFT: [[f64; 3]; 6] = [
    [-3.7362, -2.9838, -2.6401],
    [-3.5601, -2.9219, -2.6001],
    [-3.5159, -2.8941, -2.5815],
    [-3.4723, -2.8797, -2.5836],
    [-3.4638, -2.8727, -2.5691],
    [-3.4512, -2.8603, -2.5723],
];
const EMBEDDED_DRIFT_TREND: [[f64; 3]; 6] = [
    [-4.3991, -3.6048, -3.2438],
    [-4.1574, -3.5008, -3.1792],
    [-4.0485, -3.4608, -3.1566],
    [-4.0015, -3.4333, -3.1456],
    [-3.9970, -3.4227, -3.1337],
    [-3.9570, -3.4124, -3.1256],
];
