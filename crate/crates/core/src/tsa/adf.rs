use serde::{Deserialize, Serialize};

use super::critical::CriticalValueTable;
use super::ols::{ols_fit, Matrix};
use super::{Deterministic, Significance, TsaError};

/// Usable regression rows required beyond the lag order.
const MIN_EXTRA_ROWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdfSpec {
    /// `p`: the regression carries `p − 1` lagged differences.
    pub lag_order: usize,
    pub include_drift: bool,
    pub include_trend: bool,
    pub significance: Significance,
}

impl Default for AdfSpec {
    fn default() -> Self {
        Self {
            lag_order: 3,
            include_drift: true,
            include_trend: true,
            significance: Significance::One,
        }
    }
}

impl AdfSpec {
    pub fn deterministic(&self) -> Result<Deterministic, TsaError> {
        match (self.include_drift, self.include_trend) {
            (false, false) => Ok(Deterministic::None),
            (true, false) => Ok(Deterministic::Drift),
            (true, true) => Ok(Deterministic::DriftTrend),
            (false, true) => Err(TsaError::TrendWithoutDrift),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    /// `γ̂ / se(γ̂)`.
    pub statistic: f64,
    pub gamma: f64,
    /// Coefficients on `Δy_{t−1} … Δy_{t−p+1}`.
    pub delta: Vec<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub critical_value: f64,
    /// Unit root rejected: `statistic < critical_value`.
    pub converged: bool,
    pub lag_order: usize,
    pub nobs: usize,
}

/// Augmented Dickey-Fuller test of `Δy_t = α + βt + γy_{t−1} + Σ δᵢΔy_{t−i} + ε_t`.
///
/// Rows run over `t = p … n−1`, so `n − p` observations enter the fit and
/// the time index is the 0-based position `t`. Critical values come from the
/// embedded simulation tables for the chosen deterministic terms.
pub fn adf_test(y: &[f64], spec: &AdfSpec) -> Result<AdfResult, TsaError> {
    adf_test_with(
        y,
        spec,
        &CriticalValueTable::embedded(spec.deterministic()?),
    )
}

/// [`adf_test`] against an explicit critical value table.
pub fn adf_test_with(
    y: &[f64],
    spec: &AdfSpec,
    table: &CriticalValueTable,
) -> Result<AdfResult, TsaError> {
    let p = spec.lag_order;
    if p == 0 {
        return Err(TsaError::InvalidLagOrder);
    }
    let deterministic = spec.deterministic()?;
    let n = y.len();
    if n < p + MIN_EXTRA_ROWS {
        return Err(TsaError::TooShort {
            needed: p + MIN_EXTRA_ROWS,
            got: n,
        });
    }
    if y.iter().all(|v| *v == y[0]) {
        return Err(TsaError::Degenerate);
    }

    let dy = |t: usize| y[t] - y[t - 1];
    let rows: Vec<Vec<f64>> = (p..n)
        .map(|t| {
            let mut row = Vec::with_capacity(deterministic.terms() + p);
            if spec.include_drift {
                row.push(1.0);
            }
            if spec.include_trend {
                row.push(t as f64);
            }
            row.push(y[t - 1]);
            row.extend((1..p).map(|i| dy(t - i)));
            row
        })
        .collect();
    let response: Vec<f64> = (p..n).map(dy).collect();
    let fit = ols_fit(&Matrix::from_rows(&rows), &response)?;

    let mut c = 0;
    let alpha = spec.include_drift.then(|| {
        c += 1;
        fit.coefficients[c - 1]
    });
    let beta = spec.include_trend.then(|| {
        c += 1;
        fit.coefficients[c - 1]
    });
    let gamma_col = c;
    let statistic = fit.t_stat(gamma_col);
    let nobs = n - p;
    let critical_value = table.lookup(spec.significance, nobs);
    Ok(AdfResult {
        statistic,
        gamma: fit.coefficients[gamma_col],
        delta: fit.coefficients[gamma_col + 1..].to_vec(),
        alpha,
        beta,
        critical_value,
        converged: statistic < critical_value,
        lag_order: p,
        nobs,
    })
}
