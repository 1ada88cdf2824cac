//! Dynamic time warping of conversational strategy event times.
//!
//! The step pattern is symmetric: a diagonal step costs twice the local
//! distance, horizontal and vertical steps cost it once, and the first cell
//! is entered diagonally. With open-end alignment the end of series B is
//! free, so A may match any prefix of B. Distances are normalized by
//! `n + m`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Session, StrategyKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlignError {
    #[error("empty event series")]
    EmptySeries,
    #[error("session has no strategy annotation track")]
    MissingTrack,
    #[error("non-finite timestamp")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DtwOptions {
    /// Free the endpoint of series B.
    pub open_end: bool,
}

impl Default for DtwOptions {
    fn default() -> Self {
        Self { open_end: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub raw_distance: f64,
    /// `raw_distance / (n + m)`.
    pub normalized_distance: f64,
    /// 0-based `(index in A, index in B)` pairs from `(0, 0)` to
    /// `(n − 1, matched_end)`.
    pub path: Vec<(usize, usize)>,
    /// Last matched index of B; `m − 1` unless the open end cut B short.
    pub matched_end: usize,
    pub n: usize,
    pub m: usize,
}

#[derive(Clone, Copy)]
enum Step {
    Start,
    Diagonal,
    Vertical,
    Horizontal,
}

pub fn dtw(a: &[f64], b: &[f64], options: DtwOptions) -> Result<AlignmentResult, AlignError> {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return Err(AlignError::EmptySeries);
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(AlignError::NonFinite);
    }

    let mut cost = vec![f64::INFINITY; n * m];
    let mut step = vec![Step::Start; n * m];
    let at = |i: usize, j: usize| i * m + j;
    for i in 0..n {
        for j in 0..m {
            let d = (a[i] - b[j]).abs();
            if i == 0 && j == 0 {
                cost[0] = 2.0 * d;
                continue;
            }
            let mut best = (f64::INFINITY, Step::Start);
            if i > 0 && j > 0 {
                best = (cost[at(i - 1, j - 1)] + 2.0 * d, Step::Diagonal);
            }
            if i > 0 && cost[at(i - 1, j)] + d < best.0 {
                best = (cost[at(i - 1, j)] + d, Step::Vertical);
            }
            if j > 0 && cost[at(i, j - 1)] + d < best.0 {
                best = (cost[at(i, j - 1)] + d, Step::Horizontal);
            }
            cost[at(i, j)] = best.0;
            step[at(i, j)] = best.1;
        }
    }

    let matched_end = if options.open_end {
        (0..m)
            .min_by(|&x, &y| cost[at(n - 1, x)].total_cmp(&cost[at(n - 1, y)]))
            .expect("m > 0")
    } else {
        m - 1
    };
    let raw_distance = cost[at(n - 1, matched_end)];

    let mut path = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n - 1, matched_end);
    loop {
        path.push((i, j));
        match step[at(i, j)] {
            Step::Start => break,
            Step::Diagonal => {
                i -= 1;
                j -= 1;
            }
            Step::Vertical => i -= 1,
            Step::Horizontal => j -= 1,
        }
    }
    path.reverse();

    Ok(AlignmentResult {
        raw_distance,
        normalized_distance: raw_distance / (n + m) as f64,
        path,
        matched_end,
        n,
        m,
    })
}

/// Event times of one speaker for one strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSeries {
    pub kind: StrategyKind,
    pub speaker: String,
    pub timestamps: Vec<f64>,
}

/// Outcome of aligning two speakers' events for one strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StrategyAlignment {
    Aligned {
        /// Anchored series (fewer events).
        a: EventSeries,
        /// Open-ended series (more events).
        b: EventSeries,
        result: AlignmentResult,
    },
    /// At least one speaker has a single event.
    InsufficientEvents { a: EventSeries, b: EventSeries },
}

/// Minimum events per speaker for a meaningful alignment.
pub const MIN_EVENTS: usize = 2;

/// Aligns the two speakers' events of `kind`. B, the series with the free
/// endpoint, is the speaker with more events; on ties B is the second
/// speaker in id order.
pub fn strategy_alignment(
    session: &Session,
    kind: StrategyKind,
    options: DtwOptions,
) -> Result<StrategyAlignment, AlignError> {
    let mut ids = session.speakers();
    ids.sort();
    let series = |speaker: &str| -> Result<EventSeries, AlignError> {
        let timestamps = session
            .strategy_times(kind, speaker)
            .ok_or(AlignError::MissingTrack)?;
        Ok(EventSeries {
            kind,
            speaker: speaker.to_string(),
            timestamps,
        })
    };
    let (first, second) = (series(ids[0])?, series(ids[1])?);
    if first.timestamps.is_empty() || second.timestamps.is_empty() {
        return Err(AlignError::EmptySeries);
    }
    let (a, b) = if first.timestamps.len() > second.timestamps.len() {
        (second, first)
    } else {
        (first, second)
    };
    if a.timestamps.len() < MIN_EVENTS || b.timestamps.len() < MIN_EVENTS {
        return Ok(StrategyAlignment::InsufficientEvents { a, b });
    }
    let result = dtw(&a.timestamps, &b.timestamps, options)?;
    Ok(StrategyAlignment::Aligned { a, b, result })
}
