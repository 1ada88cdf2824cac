use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::TsaError;
use crate::paraling::Feature;

/// Composite convergence strength of one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrengthScore {
    /// Min-max scaled negated statistic per feature; 1 is the strongest
    /// convergence in the population.
    pub per_feature: BTreeMap<Feature, f64>,
    /// Unweighted mean of `per_feature`.
    pub composite: f64,
}

/// Scales ADF statistics per feature across every session in `statistics`
/// and averages the scaled values of each session.
///
/// Statistics are negated first, so the most negative raw statistic of a
/// feature maps to 1 and the least negative to 0. Sessions average only the
/// features they have.
pub fn convergence_strength<K: Ord + Clone>(
    statistics: &BTreeMap<(Feature, K), f64>,
) -> Result<BTreeMap<K, StrengthScore>, TsaError> {
    let mut ranges: BTreeMap<Feature, (f64, f64)> = BTreeMap::new();
    for (&(feature, _), &stat) in statistics {
        let x = -stat;
        let e = ranges.entry(feature).or_insert((x, x));
        e.0 = e.0.min(x);
        e.1 = e.1.max(x);
    }
    if let Some((&feature, _)) = ranges.iter().find(|(_, (lo, hi))| hi <= lo) {
        return Err(TsaError::ZeroRange(feature));
    }

    let mut out: BTreeMap<K, StrengthScore> = BTreeMap::new();
    for ((feature, key), &stat) in statistics {
        let (lo, hi) = ranges[feature];
        let scaled = (-stat - lo) / (hi - lo);
        out.entry(key.clone())
            .or_insert_with(|| StrengthScore {
                per_feature: BTreeMap::new(),
                composite: 0.0,
            })
            .per_feature
            .insert(*feature, scaled);
    }
    for score in out.values_mut() {
        score.composite = score.per_feature.values().sum::<f64>() / score.per_feature.len() as f64;
    }
    Ok(out)
}
