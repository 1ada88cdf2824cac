use serde::{Deserialize, Serialize};

use super::ols::{ols_fit, Matrix, OlsError};
use super::TsaError;
use crate::stats::f_sf;

/// Level at which a Granger F-test is called significant.
pub const GRANGER_ALPHA: f64 = 0.05;

/// Rows required beyond the lag count.
const MIN_EXTRA_ROWS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrangerResult {
    pub f_statistic: f64,
    pub p_value: f64,
    pub lags: usize,
    pub df_num: usize,
    pub df_den: usize,
    /// `(cause, effect)` series labels.
    pub direction: (String, String),
    pub significant: bool,
    /// The cause block was collinear with the restricted model and dropped;
    /// the result is then `F = 0`, `p = 1`.
    pub cause_dropped: bool,
}

impl GrangerResult {
    pub fn with_direction(mut self, cause: impl Into<String>, effect: impl Into<String>) -> Self {
        self.direction = (cause.into(), effect.into());
        self
    }
}

/// F-test of whether `lags` past values of `cause` improve an autoregression
/// of `effect` on its own `lags` past values plus an intercept.
///
/// With `m = n − lags` usable rows, `F = ((RSS_r − RSS_u)/lags) / (RSS_u/(m −
/// 2·lags − 1))` referred to `F(lags, m − 2·lags − 1)`. A constant or
/// otherwise collinear cause block yields `F = 0`, `p = 1`.
pub fn granger_causes(
    effect: &[f64],
    cause: &[f64],
    lags: usize,
) -> Result<GrangerResult, TsaError> {
    if effect.len() != cause.len() {
        return Err(TsaError::LengthMismatch {
            left: effect.len(),
            right: cause.len(),
        });
    }
    if lags == 0 {
        return Err(TsaError::InvalidLagOrder);
    }
    let n = effect.len();
    if n < lags + MIN_EXTRA_ROWS {
        return Err(TsaError::TooShort {
            needed: lags + MIN_EXTRA_ROWS,
            got: n,
        });
    }

    let restricted_rows: Vec<Vec<f64>> = (lags..n)
        .map(|t| {
            std::iter::once(1.0)
                .chain((1..=lags).map(|i| effect[t - i]))
                .collect()
        })
        .collect();
    let unrestricted_rows: Vec<Vec<f64>> = restricted_rows
        .iter()
        .zip(lags..n)
        .map(|(row, t)| {
            row.iter()
                .copied()
                .chain((1..=lags).map(|i| cause[t - i]))
                .collect()
        })
        .collect();
    let response = &effect[lags..];
    let rows = n - lags;
    let df_num = lags;
    let df_den = rows - 2 * lags - 1;

    let restricted = ols_fit(&Matrix::from_rows(&restricted_rows), response)?;
    let (f_statistic, p_value, cause_dropped) =
        match ols_fit(&Matrix::from_rows(&unrestricted_rows), response) {
            Ok(unrestricted) => {
                let gain = (restricted.rss - unrestricted.rss).max(0.0);
                if unrestricted.rss <= f64::EPSILON * restricted.rss.max(1.0) {
                    if gain > 0.0 {
                        (f64::INFINITY, 0.0, false)
                    } else {
                        (0.0, 1.0, false)
                    }
                } else {
                    let f = (gain / df_num as f64) / (unrestricted.rss / df_den as f64);
                    (f, f_sf(f, df_num as f64, df_den as f64), false)
                }
            }
            Err(OlsError::RankDeficient { column }) if column > lags => (0.0, 1.0, true),
            Err(e) => return Err(e.into()),
        };

    Ok(GrangerResult {
        f_statistic,
        p_value,
        lags,
        df_num,
        df_den,
        direction: ("cause".into(), "effect".into()),
        significant: p_value < GRANGER_ALPHA,
        cause_dropped,
    })
}
