use serde::{Deserialize, Serialize};

use super::TsaError;
use crate::paraling::Feature;

/// Largest partner lag for difference series.
pub const MAX_DIFFERENCE_LAG: usize = 2;

/// Partner difference `y_t = A_t − B_{t−lag}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferencedSeries {
    pub values: Vec<f64>,
    pub lag: usize,
    pub feature: Option<Feature>,
}

impl std::ops::Deref for DifferencedSeries {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

pub fn difference(a: &[f64], b: &[f64], lag: usize) -> Result<DifferencedSeries, TsaError> {
    if a.len() != b.len() {
        return Err(TsaError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if lag > MAX_DIFFERENCE_LAG {
        return Err(TsaError::InvalidLag(lag));
    }
    let values = (lag..a.len()).map(|t| a[t] - b[t - lag]).collect();
    Ok(DifferencedSeries {
        values,
        lag,
        feature: None,
    })
}

/// Residuals of the least-squares line `a + b·t`, `t = 0, 1, …`.
pub fn detrend(series: &[f64]) -> Result<Vec<f64>, TsaError> {
    let n = series.len();
    if n < 3 {
        return Err(TsaError::TooShort { needed: 3, got: n });
    }
    let nf = n as f64;
    let t_mean = (nf - 1.0) / 2.0;
    let y_mean = series.iter().sum::<f64>() / nf;
    let (mut sty, mut stt) = (0.0, 0.0);
    for (t, y) in series.iter().enumerate() {
        let dt = t as f64 - t_mean;
        sty += dt * (y - y_mean);
        stt += dt * dt;
    }
    let slope = sty / stt;
    Ok(series
        .iter()
        .enumerate()
        .map(|(t, y)| (y - y_mean) - slope * (t as f64 - t_mean))
        .collect())
}

/// Centered moving average of odd width; the window shrinks symmetrically
/// in reach but is truncated at the series edges.
pub fn smooth(series: &[f64], window: usize) -> Result<Vec<f64>, TsaError> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(TsaError::InvalidWindow(window));
    }
    let half = window / 2;
    let n = series.len();
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            let part = &series[lo..hi];
            // offset by the first element so constant windows stay exact
            let base = part[0];
            base + part.iter().map(|v| v - base).sum::<f64>() / part.len() as f64
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn difference_cases() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(difference(&a, &a, 0).unwrap().values, vec![0.0; 3]);
        assert_eq!(
            difference(&a, &[0.0, 1.0, 2.0], 0).unwrap().values,
            vec![1.0, 1.0, 1.0]
        );
        // A1 − B0 = 2 − 9, A2 − B1 = 3 − 1
        let d = difference(&a, &[9.0, 1.0, 2.0], 1).unwrap();
        assert_eq!(d.values, vec![-7.0, 2.0]);
        assert_eq!(d.len(), 2);
        assert_eq!(
            difference(&a, &[9.0, 1.0, 2.0], 2).unwrap().values,
            vec![3.0 - 9.0]
        );
        assert!(matches!(
            difference(&a, &[1.0], 0),
            Err(TsaError::LengthMismatch { .. })
        ));
        assert!(matches!(
            difference(&a, &a, 3),
            Err(TsaError::InvalidLag(3))
        ));
    }

    #[test]
    fn detrend_cases() {
        assert!(detrend(&[1.0, 2.0, 3.0])
            .unwrap()
            .iter()
            .all(|v| v.abs() < 1e-12));
        assert!(detrend(&[4.0; 5]).unwrap().iter().all(|v| v.abs() < 1e-12));
        // normal equations for [0,0,3]: b = 1.5, a = −0.5 → fitted [−0.5, 1, 2.5]
        let r = detrend(&[0.0, 0.0, 3.0]).unwrap();
        let expected = [0.5, -1.0, 0.5];
        for (x, e) in r.iter().zip(expected) {
            assert!((x - e).abs() < 1e-12, "{r:?}");
        }
        assert!(matches!(
            detrend(&[1.0, 2.0]),
            Err(TsaError::TooShort { .. })
        ));
    }

    #[test]
    fn smooth_cases() {
        assert_eq!(smooth(&[2.0; 4], 3).unwrap(), vec![2.0; 4]);
        assert_eq!(smooth(&[0.0, 3.0, 0.0], 3).unwrap(), vec![1.5, 1.0, 1.5]);
        assert_eq!(smooth(&[1.0, 5.0, 2.0], 1).unwrap(), vec![1.0, 5.0, 2.0]);
        assert!(smooth(&[1.0], 2).is_err());
        assert!(smooth(&[1.0], 0).is_err());
        assert!(smooth(&[], 3).unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn detrended_is_centered_and_uncorrelated(v in prop::collection::vec(-100.0f64..100.0, 3..60)) {
            let r = detrend(&v).unwrap();
            let n = r.len() as f64;
            let mean = r.iter().sum::<f64>() / n;
            let cov: f64 = r.iter().enumerate().map(|(t, x)| (t as f64 - (n - 1.0) / 2.0) * x).sum::<f64>() / n;
            prop_assert!(mean.abs() < 1e-9);
            prop_assert!(cov.abs() < 1e-9);
        }

        #[test]
        fn smooth_keeps_length_and_constants(c in -50.0f64..50.0, n in 0usize..40, half in 0usize..4) {
            let v = vec![c; n];
            let s = smooth(&v, 2 * half + 1).unwrap();
            prop_assert_eq!(s.len(), n);
            prop_assert!(s.iter().all(|x| *x == c));
        }
    }
}
