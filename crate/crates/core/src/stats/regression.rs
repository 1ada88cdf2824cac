//! Outcome regression with grouping factors entered as fixed dummy columns.
//!
//! This stands in for a random-intercept mixed model: each grouping factor
//! (for example dyad and session) contributes one indicator column per level
//! except its first, alongside the fixed effects of interest and the
//! covariates.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::tsa::{ols_fit, Matrix};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutcomeData {
    pub outcome: Vec<f64>,
    pub fixed_effects: Vec<(String, Vec<f64>)>,
    pub covariates: Vec<(String, Vec<f64>)>,
    /// Categorical grouping factors as level labels per observation.
    pub groups: Vec<(String, Vec<String>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeFit {
    /// Column names, starting with `intercept`.
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub r_squared: f64,
    pub n: usize,
}

impl OutcomeFit {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.coefficients[i])
    }
}

pub fn dummy_ols_outcomes(data: &OutcomeData) -> Result<OutcomeFit, StatsError> {
    let n = data.outcome.len();
    let mut names = vec!["intercept".to_string()];
    let mut columns = vec![vec![1.0; n]];
    for (name, col) in data.fixed_effects.iter().chain(&data.covariates) {
        if col.len() != n {
            return Err(StatsError::LengthMismatch(n, col.len()));
        }
        names.push(name.clone());
        columns.push(col.clone());
    }
    for (factor, labels) in &data.groups {
        if labels.len() != n {
            return Err(StatsError::LengthMismatch(n, labels.len()));
        }
        let levels: BTreeSet<&String> = labels.iter().collect();
        for level in levels.into_iter().skip(1) {
            names.push(format!("{factor}={level}"));
            columns.push(
                labels
                    .iter()
                    .map(|l| f64::from(u8::from(l == level)))
                    .collect(),
            );
        }
    }
    if n <= columns.len() {
        return Err(StatsError::TooFew {
            needed: columns.len() + 1,
            got: n,
        });
    }

    let fit = ols_fit(&Matrix::from_columns(&columns), &data.outcome).map_err(|e| match e {
        crate::tsa::OlsError::RankDeficient { column } => StatsError::Design(format!(
            "column `{}` is collinear with earlier columns",
            names[column]
        )),
        other => other.into(),
    })?;
    let m = data.outcome.iter().sum::<f64>() / n as f64;
    let tss: f64 = data.outcome.iter().map(|y| (y - m).powi(2)).sum();
    let r_squared = if tss == 0.0 { 1.0 } else { 1.0 - fit.rss / tss };
    Ok(OutcomeFit {
        names,
        coefficients: fit.coefficients,
        std_errors: fit.std_errors,
        r_squared,
        n,
    })
}
