//! Session transcripts, annotation tracks and time slicing.
//!
//! A [`Session`] holds the utterances of exactly two speakers plus optional
//! thin-slice rapport ratings and conversational strategy events. Sessions are
//! validated on construction and immutable afterwards.
//!
//! Two on-disk encodings are supported, see [`format`]: a tab-separated record
//! format and a JSON document with the same field names.

pub mod format;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use format::{parse_session, to_json, to_tsv};

/// Default slice width in seconds.
pub const SLICE_WIDTH: f64 = 30.0;

/// Inline annotation for a laughter event.
pub const LAUGHTER_MARKER: &str = "[laughter]";

/// Highest session index in a dyad's series of sessions.
pub const MAX_SESSION_INDEX: u8 = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorpusError {
    #[error("{record}: field `{field}`: {message}")]
    Schema {
        record: String,
        field: String,
        message: String,
    },
    #[error("{record}: unknown speaker id `{speaker}`: session must have exactly two speakers")]
    UnknownSpeaker { record: String, speaker: String },
    #[error("session must have exactly two speakers: {0}")]
    SpeakerPair(String),
    #[error("{record}: {message}")]
    Timestamp { record: String, message: String },
    #[error("slice width must be positive, got {0}")]
    InvalidWidth(f64),
}

impl CorpusError {
    pub(crate) fn schema(
        record: impl Into<String>,
        field: &str,
        message: impl Into<String>,
    ) -> Self {
        Self::Schema {
            record: record.into(),
            field: field.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relationship {
    Friends,
    Strangers,
}

impl Relationship {
    pub fn as_str(self) -> &'static str {
        match self {
            Relationship::Friends => "friends",
            Relationship::Strangers => "strangers",
        }
    }
}

impl FromStr for Relationship {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "friends" => Ok(Relationship::Friends),
            "strangers" => Ok(Relationship::Strangers),
            other => Err(format!("expected `friends` or `strangers`, got `{other}`")),
        }
    }
}

impl fmt::Display for Relationship {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Annotated relational conversational strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    SelfDisclosure,
    SharedExperience,
    Praise,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [
        StrategyKind::SelfDisclosure,
        StrategyKind::SharedExperience,
        StrategyKind::Praise,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::SelfDisclosure => "self_disclosure",
            StrategyKind::SharedExperience => "shared_experience",
            StrategyKind::Praise => "praise",
        }
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                format!("expected one of self_disclosure, shared_experience, praise; got `{s}`")
            })
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Speaker {
    pub id: String,
    pub gender: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker: String,
    pub start: f64,
    pub end: f64,
    pub text: String,
    /// Independent clauses. When absent, [`Utterance::clauses`] falls back to
    /// the punctuation heuristic in [`count_clauses`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clause_count: Option<u32>,
    #[serde(default)]
    pub laughter_count: u32,
}

impl Utterance {
    /// Builds an utterance, counting `[laughter]` markers when no explicit
    /// laughter count is given.
    pub fn new(
        speaker: impl Into<String>,
        start: f64,
        end: f64,
        text: impl Into<String>,
        clause_count: Option<u32>,
        laughter_count: Option<u32>,
    ) -> Self {
        let text = text.into();
        let laughter_count = laughter_count.unwrap_or_else(|| count_laughter_markers(&text));
        Self {
            speaker: speaker.into(),
            start,
            end,
            text,
            clause_count,
            laughter_count,
        }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn words(&self) -> u32 {
        count_words(&self.text)
    }

    pub fn characters(&self) -> u32 {
        count_characters(&self.text)
    }

    pub fn clauses(&self) -> u32 {
        self.clause_count
            .unwrap_or_else(|| count_clauses(&self.text))
    }

    /// Share of this utterance's duration that falls inside `slice`.
    ///
    /// Zero-length utterances belong wholly to the slice holding their start.
    pub fn fraction_in(&self, slice: &Slice) -> f64 {
        let len = self.duration();
        if len <= 0.0 {
            return if slice.contains(self.start) { 1.0 } else { 0.0 };
        }
        let lo = self.start.max(slice.start);
        let hi = self.end.min(slice.end);
        if hi <= lo {
            0.0
        } else {
            ((hi - lo) / len).min(1.0)
        }
    }
}

/// A thin-slice rapport rating on the 1..7 scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RapportRating {
    pub slice_index: usize,
    pub rating: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyEvent {
    pub strategy_kind: StrategyKind,
    pub speaker: String,
    pub timestamp_seconds: f64,
}

/// Session-level metadata, the first record of every transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub dyad_id: String,
    pub session_index: u8,
    pub relationship: Relationship,
    pub speakers: [Speaker; 2],
    pub duration: f64,
}

/// One dyad's recorded interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    header: SessionHeader,
    utterances: Vec<Utterance>,
    rapport: Option<Vec<RapportRating>>,
    strategies: Option<Vec<StrategyEvent>>,
}

impl Session {
    /// Validates and assembles a session. Utterances are stably sorted by
    /// start time; empty tracks are normalized to absent.
    ///
    /// Errors name the offending utterance, rating or event by its position
    /// in the given vectors.
    pub fn new(
        header: SessionHeader,
        utterances: Vec<Utterance>,
        rapport: Option<Vec<RapportRating>>,
        strategies: Option<Vec<StrategyEvent>>,
    ) -> Result<Self, CorpusError> {
        let record = |kind: &str, i: usize| format!("{kind}[{i}]");
        validate_header(&header, "header")?;
        for (i, u) in utterances.iter().enumerate() {
            validate_utterance(&header, u, &record("utterances", i))?;
        }
        if let Some(track) = &rapport {
            for (i, r) in track.iter().enumerate() {
                validate_rating(&header, r, &record("rapport", i))?;
            }
        }
        if let Some(events) = &strategies {
            for (i, e) in events.iter().enumerate() {
                validate_event(&header, e, &record("strategies", i))?;
            }
        }
        Ok(Self::assemble(header, utterances, rapport, strategies))
    }

    /// Assembles already validated parts.
    pub(crate) fn assemble(
        header: SessionHeader,
        mut utterances: Vec<Utterance>,
        rapport: Option<Vec<RapportRating>>,
        strategies: Option<Vec<StrategyEvent>>,
    ) -> Self {
        utterances.sort_by(|a, b| a.start.total_cmp(&b.start));
        Self {
            header,
            utterances,
            rapport: rapport.filter(|t| !t.is_empty()),
            strategies: strategies.filter(|t| !t.is_empty()),
        }
    }

    pub fn header(&self) -> &SessionHeader {
        &self.header
    }

    pub fn dyad_id(&self) -> &str {
        &self.header.dyad_id
    }

    pub fn session_index(&self) -> u8 {
        self.header.session_index
    }

    pub fn relationship(&self) -> Relationship {
        self.header.relationship
    }

    pub fn duration(&self) -> f64 {
        self.header.duration
    }

    pub fn speakers(&self) -> [&str; 2] {
        [&self.header.speakers[0].id, &self.header.speakers[1].id]
    }

    pub fn utterances(&self) -> &[Utterance] {
        &self.utterances
    }

    pub fn utterances_by<'a>(
        &'a self,
        speaker: &'a str,
    ) -> impl Iterator<Item = &'a Utterance> + 'a {
        self.utterances.iter().filter(move |u| u.speaker == speaker)
    }

    pub fn rapport_track(&self) -> Option<&[RapportRating]> {
        self.rapport.as_deref()
    }

    pub fn strategy_events(&self) -> Option<&[StrategyEvent]> {
        self.strategies.as_deref()
    }

    /// Sorted event times of one speaker for one strategy, or `None` when the
    /// session carries no strategy annotation at all.
    pub fn strategy_times(&self, kind: StrategyKind, speaker: &str) -> Option<Vec<f64>> {
        let events = self.strategies.as_ref()?;
        let mut times: Vec<f64> = events
            .iter()
            .filter(|e| e.strategy_kind == kind && e.speaker == speaker)
            .map(|e| e.timestamp_seconds)
            .collect();
        times.sort_by(f64::total_cmp);
        Some(times)
    }

    pub fn slices(&self, width: f64) -> Result<Vec<Slice>, CorpusError> {
        segment(self.header.duration, width)
    }

    /// Per-slice rapport ratings for `n_slices` slices. Slices without a
    /// rating carry the previous rating forward; leading gaps take the first
    /// rating. `None` when the session has no rapport track.
    pub fn rapport_series(&self, n_slices: usize) -> Option<Vec<f64>> {
        let track = self.rapport.as_ref()?;
        let mut slots: Vec<Option<f64>> = vec![None; n_slices];
        for r in track {
            if r.slice_index < n_slices {
                slots[r.slice_index] = Some(r.rating);
            }
        }
        let first = slots.iter().flatten().copied().next()?;
        let mut last = first;
        Some(
            slots
                .into_iter()
                .map(|s| {
                    if let Some(v) = s {
                        last = v;
                    }
                    last
                })
                .collect(),
        )
    }
}

fn validate_header(h: &SessionHeader, record: &str) -> Result<(), CorpusError> {
    if h.dyad_id.trim().is_empty() {
        return Err(CorpusError::schema(record, "dyad_id", "must not be empty"));
    }
    if !(1..=MAX_SESSION_INDEX).contains(&h.session_index) {
        return Err(CorpusError::schema(
            record,
            "session_index",
            format!(
                "must be in 1..={MAX_SESSION_INDEX}, got {}",
                h.session_index
            ),
        ));
    }
    if !(h.duration.is_finite() && h.duration >= 0.0) {
        return Err(CorpusError::Timestamp {
            record: record.to_string(),
            message: format!(
                "duration must be finite and non-negative, got {}",
                h.duration
            ),
        });
    }
    let [a, b] = &h.speakers;
    if a.id.is_empty() || b.id.is_empty() {
        return Err(CorpusError::SpeakerPair(
            "speaker ids must not be empty".into(),
        ));
    }
    if a.id == b.id {
        return Err(CorpusError::SpeakerPair(format!(
            "speaker id `{}` declared twice",
            a.id
        )));
    }
    Ok(())
}

fn check_time(value: f64, duration: f64, record: &str, field: &str) -> Result<(), CorpusError> {
    if !value.is_finite() || value < 0.0 {
        return Err(CorpusError::Timestamp {
            record: record.to_string(),
            message: format!("`{field}` must be finite and non-negative, got {value}"),
        });
    }
    if value > duration {
        return Err(CorpusError::Timestamp {
            record: record.to_string(),
            message: format!("`{field}` = {value} exceeds session duration {duration}"),
        });
    }
    Ok(())
}

fn check_speaker(h: &SessionHeader, speaker: &str, record: &str) -> Result<(), CorpusError> {
    if h.speakers.iter().any(|s| s.id == speaker) {
        Ok(())
    } else {
        Err(CorpusError::UnknownSpeaker {
            record: record.to_string(),
            speaker: speaker.to_string(),
        })
    }
}

pub(crate) fn validate_utterance(
    h: &SessionHeader,
    u: &Utterance,
    record: &str,
) -> Result<(), CorpusError> {
    check_speaker(h, &u.speaker, record)?;
    check_time(u.start, h.duration, record, "start")?;
    check_time(u.end, h.duration, record, "end")?;
    if u.end < u.start {
        return Err(CorpusError::Timestamp {
            record: record.to_string(),
            message: format!("end {} precedes start {}", u.end, u.start),
        });
    }
    Ok(())
}

pub(crate) fn validate_rating(
    _h: &SessionHeader,
    r: &RapportRating,
    record: &str,
) -> Result<(), CorpusError> {
    if !(1.0..=7.0).contains(&r.rating) {
        return Err(CorpusError::schema(
            record,
            "rating",
            format!("must be in [1, 7], got {}", r.rating),
        ));
    }
    Ok(())
}

pub(crate) fn validate_event(
    h: &SessionHeader,
    e: &StrategyEvent,
    record: &str,
) -> Result<(), CorpusError> {
    check_speaker(h, &e.speaker, record)?;
    check_time(e.timestamp_seconds, h.duration, record, "timestamp_seconds")
}

/// A half-open time window `[start, end)` of a session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub index: usize,
    pub start: f64,
    pub end: f64,
}

impl Slice {
    pub fn width(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t < self.end
    }
}

/// Tiles `[0, duration)` into `ceil(duration / width)` consecutive slices.
/// The last slice is truncated at `duration` when the width does not divide it.
pub fn segment(duration: f64, width: f64) -> Result<Vec<Slice>, CorpusError> {
    if !(width.is_finite() && width > 0.0) {
        return Err(CorpusError::InvalidWidth(width));
    }
    if duration <= 0.0 {
        return Ok(Vec::new());
    }
    let count = (duration / width).ceil() as usize;
    Ok((0..count)
        .map(|index| Slice {
            index,
            start: index as f64 * width,
            end: ((index + 1) as f64 * width).min(duration),
        })
        .collect())
}

/// Index of the slice that owns time `t`; times at or past the final edge
/// belong to the last slice.
pub fn slice_of(t: f64, slices: &[Slice]) -> Option<usize> {
    let last = slices.last()?;
    if t >= last.start {
        return Some(last.index);
    }
    slices.iter().position(|s| s.contains(t))
}

/// Rounds `count · fraction` half-up.
pub fn prorate(count: u32, fraction: f64) -> u32 {
    (f64::from(count) * fraction + 0.5).floor() as u32
}

fn speech_tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split_whitespace().filter(|t| *t != LAUGHTER_MARKER)
}

/// Whitespace tokens, excluding laughter markers.
pub fn count_words(text: &str) -> u32 {
    speech_tokens(text).count() as u32
}

/// Alphanumeric characters, excluding whitespace, punctuation and laughter
/// markers.
pub fn count_characters(text: &str) -> u32 {
    speech_tokens(text)
        .flat_map(str::chars)
        .filter(|c| c.is_alphanumeric())
        .count() as u32
}

/// Approximates independent clauses as maximal segments delimited by `.`,
/// `?`, `!` or `;` that contain at least one token.
pub fn count_clauses(text: &str) -> u32 {
    let stripped = text.replace(LAUGHTER_MARKER, " ");
    stripped
        .split(['.', '?', '!', ';'])
        .filter(|seg| seg.chars().any(char::is_alphanumeric))
        .count() as u32
}

pub fn count_laughter_markers(text: &str) -> u32 {
    text.split_whitespace()
        .filter(|t| *t == LAUGHTER_MARKER)
        .count() as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(duration: f64) -> SessionHeader {
        SessionHeader {
            dyad_id: "D1".into(),
            session_index: 1,
            relationship: Relationship::Friends,
            speakers: [
                Speaker {
                    id: "A".into(),
                    gender: "f".into(),
                },
                Speaker {
                    id: "B".into(),
                    gender: "m".into(),
                },
            ],
            duration,
        }
    }

    #[test]
    fn segment_counts() {
        assert_eq!(segment(3600.0, 30.0).unwrap().len(), 120);
        let s = segment(45.0, 30.0).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!((s[1].start, s[1].end), (30.0, 45.0));
        assert!(segment(0.0, 30.0).unwrap().is_empty());
        assert!(matches!(
            segment(10.0, 0.0),
            Err(CorpusError::InvalidWidth(_))
        ));
        assert!(segment(10.0, -3.0).is_err());
    }

    #[test]
    fn session_sorts_and_validates() {
        let u1 = Utterance::new("B", 5.0, 6.0, "later", None, None);
        let u0 = Utterance::new("A", 1.0, 2.0, "first", None, None);
        let s = Session::new(header(10.0), vec![u1, u0], None, Some(vec![])).unwrap();
        assert_eq!(s.utterances()[0].text, "first");
        assert!(s.strategy_events().is_none());

        let bad = Utterance::new("C", 1.0, 2.0, "who", None, None);
        let err = Session::new(header(10.0), vec![bad], None, None).unwrap_err();
        assert!(err
            .to_string()
            .contains("session must have exactly two speakers"));

        let reversed = Utterance::new("A", 3.0, 2.0, "x", None, None);
        let err = Session::new(header(10.0), vec![reversed], None, None).unwrap_err();
        assert!(matches!(err, CorpusError::Timestamp { .. }));

        let late = Utterance::new("A", 3.0, 12.0, "x", None, None);
        assert!(Session::new(header(10.0), vec![late], None, None).is_err());

        let rating = RapportRating {
            slice_index: 0,
            rating: 8.0,
        };
        assert!(Session::new(header(10.0), vec![], Some(vec![rating]), None).is_err());
    }

    #[test]
    fn text_counters() {
        assert_eq!(count_words("hello world"), 2);
        assert_eq!(count_words("ha [laughter] ha"), 2);
        assert_eq!(count_characters("go now."), 5);
        assert_eq!(count_characters("a b [laughter]"), 2);
        assert_eq!(count_clauses("go now."), 1);
        assert_eq!(count_clauses("hello world"), 1);
        assert_eq!(count_clauses("Yes. No? Maybe; fine!"), 4);
        assert_eq!(count_clauses("..."), 0);
        assert_eq!(count_clauses("[laughter]."), 0);
        assert_eq!(count_laughter_markers("[laughter] ok [laughter]"), 2);
        assert_eq!(
            Utterance::new("A", 0.0, 1.0, "x [laughter]", None, None).laughter_count,
            1
        );
        assert_eq!(
            Utterance::new("A", 0.0, 1.0, "x [laughter]", None, Some(4)).laughter_count,
            4
        );
    }

    #[test]
    fn proration() {
        let slices = segment(60.0, 30.0).unwrap();
        let u = Utterance::new("A", 20.0, 40.0, "x", None, None);
        assert_eq!(u.fraction_in(&slices[0]), 0.5);
        assert_eq!(u.fraction_in(&slices[1]), 0.5);
        assert_eq!(prorate(10, 0.5), 5);
        assert_eq!(prorate(1, 0.5), 1);
        assert_eq!(prorate(3, 0.49), 1);
        let point = Utterance::new("A", 30.0, 30.0, "x", None, None);
        assert_eq!(point.fraction_in(&slices[0]), 0.0);
        assert_eq!(point.fraction_in(&slices[1]), 1.0);
        assert_eq!(slice_of(60.0, &slices), Some(1));
        assert_eq!(slice_of(29.9, &slices), Some(0));
    }

    #[test]
    fn rapport_carry_forward() {
        let track = vec![
            RapportRating {
                slice_index: 1,
                rating: 4.0,
            },
            RapportRating {
                slice_index: 3,
                rating: 6.0,
            },
        ];
        let s = Session::new(header(150.0), vec![], Some(track), None).unwrap();
        assert_eq!(s.rapport_series(5).unwrap(), vec![4.0, 4.0, 4.0, 6.0, 6.0]);
    }
}
