//! Correlations, paired t-test, z-scores, reference distributions and an OLS
//! outcome model with dummy-coded grouping factors.
//!
//! p-values come from exact t and F reference distributions at every sample
//! size.

pub mod dist;
mod regression;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dist::{f_cdf, f_sf, t_two_sided};
pub use regression::{dummy_ols_outcomes, OutcomeData, OutcomeFit};

use crate::tsa::OlsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("inputs have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("degenerate input: zero variance")]
    ZeroVariance,
    #[error("binary variable must contain both classes")]
    SingleClass,
    #[error("binary variable must be coded 0/1, got {0}")]
    NotBinary(f64),
    #[error("invalid degrees of freedom ({d1}, {d2})")]
    InvalidDegreesOfFreedom { d1: f64, d2: f64 },
    #[error("argument {0} outside the distribution's support")]
    OutOfDomain(f64),
    #[error("outcome model: {0}")]
    Regression(#[from] OlsError),
    #[error("outcome model: {0}")]
    Design(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationKind {
    Pearson,
    Spearman,
    PointBiserial,
}

impl fmt::Display for CorrelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrelationKind::Pearson => "pearson",
            CorrelationKind::Spearman => "spearman",
            CorrelationKind::PointBiserial => "point_biserial",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub coefficient: f64,
    /// Two-sided, from `t = r √((n−2)/(1−r²))` on `n − 2` degrees of freedom.
    pub p_value: f64,
    pub n: usize,
    pub kind: CorrelationKind,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn check_pair(x: &[f64], y: &[f64], min: usize) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < min {
        return Err(StatsError::TooFew {
            needed: min,
            got: x.len(),
        });
    }
    Ok(())
}

fn correlation(
    x: &[f64],
    y: &[f64],
    kind: CorrelationKind,
) -> Result<CorrelationResult, StatsError> {
    check_pair(x, y, 3)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let mut r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    if 1.0 - r.abs() <= 4.0 * f64::EPSILON {
        r = r.signum();
    }
    let n = x.len();
    let df = (n - 2) as f64;
    let p_value = if r.abs() == 1.0 {
        0.0
    } else {
        t_two_sided(r * (df / (1.0 - r * r)).sqrt(), df)
    };
    Ok(CorrelationResult {
        coefficient: r,
        p_value,
        n,
        kind,
    })
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    correlation(x, y, CorrelationKind::Pearson)
}

/// 1-based ranks with ties replaced by their average rank.
pub fn mid_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of mid-ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    check_pair(x, y, 3)?;
    correlation(&mid_ranks(x), &mid_ranks(y), CorrelationKind::Spearman)
}

/// Pearson correlation with a 0/1-coded group variable.
pub fn point_biserial(binary: &[f64], continuous: &[f64]) -> Result<CorrelationResult, StatsError> {
    check_pair(binary, continuous, 3)?;
    if let Some(&bad) = binary.iter().find(|v| **v != 0.0 && **v != 1.0) {
        return Err(StatsError::NotBinary(bad));
    }
    let ones = binary.iter().filter(|v| **v == 1.0).count();
    if ones == 0 || ones == binary.len() {
        return Err(StatsError::SingleClass);
    }
    correlation(binary, continuous, CorrelationKind::PointBiserial)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedT {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Paired t-test on `post − pre`.
pub fn paired_t(pre: &[f64], post: &[f64]) -> Result<PairedT, StatsError> {
    check_pair(pre, post, 2)?;
    let d: Vec<f64> = post.iter().zip(pre).map(|(b, a)| b - a).collect();
    let n = d.len();
    let md = mean(&d);
    let var = d.iter().map(|v| (v - md).powi(2)).sum::<f64>() / (n - 1) as f64;
    let df = n - 1;
    if var == 0.0 {
        if md == 0.0 {
            return Ok(PairedT {
                statistic: 0.0,
                df,
                p_value: 1.0,
            });
        }
        return Err(StatsError::ZeroVariance);
    }
    let statistic = md / (var / n as f64).sqrt();
    Ok(PairedT {
        statistic,
        df,
        p_value: t_two_sided(statistic, df as f64),
    })
}

/// Standardizes to mean 0 and sample standard deviation 1.
pub fn zscore(values: &[f64]) -> Result<Vec<f64>, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::TooFew {
            needed: 2,
            got: values.len(),
        });
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    if var == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let sd = var.sqrt();
    Ok(values.iter().map(|v| (v - m) / sd).collect())
}
