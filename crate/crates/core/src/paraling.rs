//! Per-slice paralinguistic features.
//!
//! Five features are computed for each speaker in each slice: words spoken,
//! message density (clauses per second between the first and last utterance
//! start), content density (characters per clause), joint-speech overlaps and
//! laughter.
//!
//! An utterance contributes to every slice its interval intersects. Word,
//! character and clause counts are prorated by the share of the utterance's
//! duration inside the slice and rounded half-up. Laughter belongs to the
//! slice holding the utterance's start.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{prorate, segment, slice_of, CorpusError, Session, Slice, Utterance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Words,
    MessageDensity,
    ContentDensity,
    Overlaps,
    Laughter,
}

impl Feature {
    pub const ALL: [Feature; 5] = [
        Feature::Words,
        Feature::MessageDensity,
        Feature::ContentDensity,
        Feature::Overlaps,
        Feature::Laughter,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Feature::Words => "words",
            Feature::MessageDensity => "message_density",
            Feature::ContentDensity => "content_density",
            Feature::Overlaps => "overlaps",
            Feature::Laughter => "laughter",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Feature::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown feature `{s}`"))
    }
}

/// The five features of one speaker in one slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub words: u32,
    pub message_density: f64,
    pub content_density: f64,
    pub overlaps: u32,
    pub laughter: u32,
}

impl FeatureVector {
    pub fn get(&self, feature: Feature) -> f64 {
        match feature {
            Feature::Words => f64::from(self.words),
            Feature::MessageDensity => self.message_density,
            Feature::ContentDensity => self.content_density,
            Feature::Overlaps => f64::from(self.overlaps),
            Feature::Laughter => f64::from(self.laughter),
        }
    }
}

/// One feature of one speaker, indexed by slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSeries {
    pub speaker: String,
    pub feature: Feature,
    pub values: Vec<f64>,
}

/// Utterances of `speaker` intersecting `slice`, with their in-slice share.
fn attributed<'a>(
    session: &'a Session,
    slice: &'a Slice,
    speaker: &'a str,
) -> impl Iterator<Item = (&'a Utterance, f64)> + 'a {
    session
        .utterances_by(speaker)
        .map(move |u| (u, u.fraction_in(slice)))
        .filter(|(_, f)| *f > 0.0)
}

pub fn word_count(session: &Session, slice: &Slice, speaker: &str) -> u32 {
    attributed(session, slice, speaker)
        .map(|(u, f)| prorate(u.words(), f))
        .sum()
}

fn clause_total(session: &Session, slice: &Slice, speaker: &str) -> u32 {
    attributed(session, slice, speaker)
        .map(|(u, f)| prorate(u.clauses(), f))
        .sum()
}

/// Clauses per second between the first and last utterance start inside the
/// slice. Starts before the slice are clamped to the slice start. Zero when
/// fewer than two utterances fall in the slice or the span is empty.
pub fn message_density(session: &Session, slice: &Slice, speaker: &str) -> f64 {
    let mut count = 0usize;
    let mut clauses = 0u32;
    let mut first = f64::INFINITY;
    let mut last = f64::NEG_INFINITY;
    for (u, f) in attributed(session, slice, speaker) {
        count += 1;
        clauses += prorate(u.clauses(), f);
        let start = u.start.max(slice.start);
        first = first.min(start);
        last = last.max(start);
    }
    let span = last - first;
    if count < 2 || span <= 0.0 {
        0.0
    } else {
        f64::from(clauses) / span
    }
}

/// Non-whitespace speech characters per clause; zero without clauses.
pub fn content_density(session: &Session, slice: &Slice, speaker: &str) -> f64 {
    let clauses = clause_total(session, slice, speaker);
    if clauses == 0 {
        return 0.0;
    }
    let chars: u32 = attributed(session, slice, speaker)
        .map(|(u, f)| prorate(u.characters(), f))
        .sum();
    f64::from(chars) / f64::from(clauses)
}

/// Union of the speaker's utterance intervals clipped to the slice.
fn speech_union(session: &Session, slice: &Slice, speaker: &str) -> Vec<(f64, f64)> {
    let mut spans: Vec<(f64, f64)> = session
        .utterances_by(speaker)
        .map(|u| (u.start.max(slice.start), u.end.min(slice.end)))
        .filter(|(lo, hi)| hi > lo)
        .collect();
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(spans.len());
    for (lo, hi) in spans {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    merged
}

/// Maximal intervals inside the slice where both speakers talk at once.
pub fn overlap_intervals(session: &Session, slice: &Slice) -> Vec<(f64, f64)> {
    let [a, b] = session.speakers();
    let ua = speech_union(session, slice, a);
    let ub = speech_union(session, slice, b);
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < ua.len() && j < ub.len() {
        let lo = ua[i].0.max(ub[j].0);
        let hi = ua[i].1.min(ub[j].1);
        if hi > lo {
            out.push((lo, hi));
        }
        if ua[i].1 < ub[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

pub fn overlap_count(session: &Session, slice: &Slice) -> u32 {
    overlap_intervals(session, slice).len() as u32
}

pub fn laughter_count(session: &Session, slices: &[Slice], slice: &Slice, speaker: &str) -> u32 {
    session
        .utterances_by(speaker)
        .filter(|u| slice_of(u.start, slices) == Some(slice.index))
        .map(|u| u.laughter_count)
        .sum()
}

pub fn feature_vector(
    session: &Session,
    slices: &[Slice],
    slice: &Slice,
    speaker: &str,
) -> FeatureVector {
    FeatureVector {
        words: word_count(session, slice, speaker),
        message_density: message_density(session, slice, speaker),
        content_density: content_density(session, slice, speaker),
        overlaps: overlap_count(session, slice),
        laughter: laughter_count(session, slices, slice, speaker),
    }
}

/// Per-slice feature vectors for both speakers of a session.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub slices: Vec<Slice>,
    pub speakers: [String; 2],
    /// `vectors[k][s]` is speaker `k`'s vector in slice `s`.
    pub vectors: [Vec<FeatureVector>; 2],
}

impl FeatureTable {
    pub fn compute(session: &Session, width: f64) -> Result<Self, CorpusError> {
        let slices = segment(session.duration(), width)?;
        let [a, b] = session.speakers();
        let row = |speaker: &str| -> Vec<FeatureVector> {
            slices
                .iter()
                .map(|s| feature_vector(session, &slices, s, speaker))
                .collect()
        };
        let vectors = [row(a), row(b)];
        Ok(Self {
            speakers: [a.to_string(), b.to_string()],
            vectors,
            slices,
        })
    }

    pub fn values(&self, speaker: usize, feature: Feature) -> Vec<f64> {
        self.vectors[speaker]
            .iter()
            .map(|v| v.get(feature))
            .collect()
    }

    pub fn series(&self) -> BTreeMap<(String, Feature), FeatureSeries> {
        let mut out = BTreeMap::new();
        for (k, speaker) in self.speakers.iter().enumerate() {
            for feature in Feature::ALL {
                out.insert(
                    (speaker.clone(), feature),
                    FeatureSeries {
                        speaker: speaker.clone(),
                        feature,
                        values: self.values(k, feature),
                    },
                );
            }
        }
        out
    }
}

/// Five series per speaker, each with one value per slice.
pub fn extract_series(
    session: &Session,
    width: f64,
) -> Result<BTreeMap<(String, Feature), FeatureSeries>, CorpusError> {
    Ok(FeatureTable::compute(session, width)?.series())
}
