//! Tests of convergence and rapport-driven causality on partner difference
//! series.
//!
//! The pipeline per feature is: partner difference ([`difference`]), an
//! augmented Dickey-Fuller regression with drift and trend ([`adf_test`]), and
//! a composite strength score across features ([`convergence_strength`]).
//! [`granger_causes`] tests whether lagged values of one series improve the
//! prediction of another.

mod adf;
pub mod critical;
mod filter;
mod granger;
pub mod ols;
mod strength;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adf::{adf_test, AdfResult, AdfSpec};
pub use critical::{critical_value, CriticalValueTable};
pub use filter::{detrend, difference, smooth, DifferencedSeries, MAX_DIFFERENCE_LAG};
pub use granger::{granger_causes, GrangerResult, GRANGER_ALPHA};
pub use ols::{ols_fit, Matrix, OlsError, OlsFit};
pub use strength::{convergence_strength, StrengthScore};

use crate::paraling::Feature;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TsaError {
    #[error("series lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("difference lag must be 0, 1 or 2, got {0}")]
    InvalidLag(usize),
    #[error("series too short: need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("degenerate series: all values are equal")]
    Degenerate,
    #[error("smoothing window must be odd and at least 1, got {0}")]
    InvalidWindow(usize),
    #[error("lag order must be at least 1")]
    InvalidLagOrder,
    #[error("unsupported significance level {0}; use 0.01, 0.05 or 0.10")]
    UnsupportedSignificance(f64),
    #[error("a trend term requires a drift term")]
    TrendWithoutDrift,
    #[error("feature `{0}` has zero range across the scaling population")]
    ZeroRange(Feature),
    #[error("regression failed: {0}")]
    Ols(#[from] OlsError),
    #[error("critical value cache: {0}")]
    Cache(String),
}

/// Deterministic terms of the unit-root regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deterministic {
    None,
    Drift,
    DriftTrend,
}

impl Deterministic {
    pub(crate) fn terms(self) -> usize {
        match self {
            Deterministic::None => 0,
            Deterministic::Drift => 1,
            Deterministic::DriftTrend => 2,
        }
    }
}

/// Supported test levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Significance {
    #[serde(rename = "0.01")]
    One,
    #[serde(rename = "0.05")]
    Five,
    #[serde(rename = "0.10")]
    Ten,
}

impl Significance {
    pub const ALL: [Significance; 3] = [Significance::One, Significance::Five, Significance::Ten];

    pub fn level(self) -> f64 {
        match self {
            Significance::One => 0.01,
            Significance::Five => 0.05,
            Significance::Ten => 0.10,
        }
    }

    pub(crate) fn column(self) -> usize {
        match self {
            Significance::One => 0,
            Significance::Five => 1,
            Significance::Ten => 2,
        }
    }
}

impl TryFrom<f64> for Significance {
    type Error = TsaError;

    fn try_from(value: f64) -> Result<Self, TsaError> {
        Significance::ALL
            .into_iter()
            .find(|s| (s.level() - value).abs() < 1e-12)
            .ok_or(TsaError::UnsupportedSignificance(value))
    }
}

impl FromStr for Significance {
    type Err = TsaError;

    fn from_str(s: &str) -> Result<Self, TsaError> {
        let v: f64 = s
            .parse()
            .map_err(|_| TsaError::UnsupportedSignificance(f64::NAN))?;
        Significance::try_from(v)
    }
}

impl fmt::Display for Significance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Significance::One => "0.01",
            Significance::Five => "0.05",
            Significance::Ten => "0.10",
        })
    }
}
