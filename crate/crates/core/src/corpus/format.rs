//! Transcript encodings.
//!
//! # Record format
//!
//! UTF-8 text, one record per line, fields separated by a single TAB. Blank
//! lines and lines whose first character is `#` are ignored. The first record
//! must be the session header:
//!
//! ```text
//! session   <dyad_id> <session_index> <friends|strangers> <speaker_a> <gender_a> <speaker_b> <gender_b> <duration>
//! utterance <speaker> <start> <end> <text> [clause_count] [laughter_count]
//! rapport   <slice_index> <rating>
//! strategy  <self_disclosure|shared_experience|praise> <speaker> <timestamp_seconds>
//! ```
//!
//! Times are seconds from session start. Optional trailing fields may be
//! omitted or left empty. Inside a field, backslash escapes `\t`, `\n`, `\r`
//! and `\\` stand for TAB, newline, carriage return and backslash; no other
//! quoting exists. A missing `laughter_count` is derived by counting
//! `[laughter]` markers in the text.
//!
//! # JSON format
//!
//! A single object with the header fields (`dyad_id`, `session_index`,
//! `relationship`, `speakers: [{id, gender}, {id, gender}]`, `duration`) plus
//! arrays `utterances`, `rapport` and `strategies` whose objects use the
//! record field names above. A document is treated as JSON when its first
//! non-whitespace character is `{`.

use serde::{Deserialize, Serialize};

use super::{
    validate_event, validate_rating, validate_utterance, CorpusError, RapportRating, Relationship,
    Session, SessionHeader, Speaker, StrategyEvent, Utterance,
};

/// Parses either encoding, detected from the first non-whitespace character.
pub fn parse_session(input: &str) -> Result<Session, CorpusError> {
    if input.trim_start().starts_with('{') {
        parse_json(input)
    } else {
        parse_tsv(input)
    }
}

pub fn parse_tsv(input: &str) -> Result<Session, CorpusError> {
    let mut header: Option<SessionHeader> = None;
    let mut utterances = Vec::new();
    let mut rapport = Vec::new();
    let mut strategies = Vec::new();
    let mut record_no = 0usize;

    for (line_idx, line) in input.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        record_no += 1;
        let label = format!("record {record_no} (line {})", line_idx + 1);
        let fields: Vec<String> = line.split('\t').map(unescape).collect();
        let rec = Record {
            label: &label,
            fields: &fields,
        };
        let kind = fields[0].as_str();

        match (kind, &header) {
            ("session", None) => {
                rec.arity(9, 9)?;
                let h = SessionHeader {
                    dyad_id: rec.text(1, "dyad_id")?,
                    session_index: rec.parse(2, "session_index")?,
                    relationship: rec.parse(3, "relationship")?,
                    speakers: [
                        Speaker {
                            id: rec.text(4, "speaker_a")?,
                            gender: fields[5].clone(),
                        },
                        Speaker {
                            id: rec.text(6, "speaker_b")?,
                            gender: fields[7].clone(),
                        },
                    ],
                    duration: rec.parse(8, "duration")?,
                };
                super::validate_header(&h, &label)?;
                header = Some(h);
            }
            ("session", Some(_)) => {
                return Err(CorpusError::schema(
                    &label,
                    "record_type",
                    "duplicate session header",
                ));
            }
            (_, None) => {
                return Err(CorpusError::schema(
                    &label,
                    "record_type",
                    format!("expected `session` header as first record, got `{kind}`"),
                ));
            }
            ("utterance", Some(h)) => {
                rec.arity(5, 7)?;
                let u = Utterance::new(
                    rec.text(1, "speaker")?,
                    rec.parse(2, "start")?,
                    rec.parse(3, "end")?,
                    fields[4].clone(),
                    rec.optional(5, "clause_count")?,
                    rec.optional(6, "laughter_count")?,
                );
                validate_utterance(h, &u, &label)?;
                utterances.push(u);
            }
            ("rapport", Some(h)) => {
                rec.arity(3, 3)?;
                let r = RapportRating {
                    slice_index: rec.parse(1, "slice_index")?,
                    rating: rec.parse(2, "rating")?,
                };
                validate_rating(h, &r, &label)?;
                rapport.push(r);
            }
            ("strategy", Some(h)) => {
                rec.arity(4, 4)?;
                let e = StrategyEvent {
                    strategy_kind: rec.parse(1, "strategy_kind")?,
                    speaker: rec.text(2, "speaker")?,
                    timestamp_seconds: rec.parse(3, "timestamp_seconds")?,
                };
                validate_event(h, &e, &label)?;
                strategies.push(e);
            }
            (other, Some(_)) => {
                return Err(CorpusError::schema(
                    &label,
                    "record_type",
                    format!("unknown record type `{other}`"),
                ));
            }
        }
    }

    let header = header.ok_or_else(|| {
        CorpusError::schema("document", "record_type", "missing `session` header record")
    })?;
    Ok(Session::assemble(
        header,
        utterances,
        Some(rapport),
        Some(strategies),
    ))
}

struct Record<'a> {
    label: &'a str,
    fields: &'a [String],
}

impl Record<'_> {
    fn arity(&self, min: usize, max: usize) -> Result<(), CorpusError> {
        let n = self.fields.len();
        if n < min || n > max {
            return Err(CorpusError::schema(
                self.label,
                &self.fields[0],
                format!("expected {} to {} fields, got {n}", min, max),
            ));
        }
        Ok(())
    }

    fn text(&self, i: usize, name: &str) -> Result<String, CorpusError> {
        let v = &self.fields[i];
        if v.is_empty() {
            return Err(CorpusError::schema(self.label, name, "must not be empty"));
        }
        Ok(v.clone())
    }

    fn parse<T: std::str::FromStr>(&self, i: usize, name: &str) -> Result<T, CorpusError>
    where
        T::Err: std::fmt::Display,
    {
        self.fields[i].trim().parse().map_err(|e| {
            CorpusError::schema(self.label, name, format!("`{}`: {e}", self.fields[i]))
        })
    }

    fn optional<T: std::str::FromStr>(&self, i: usize, name: &str) -> Result<Option<T>, CorpusError>
    where
        T::Err: std::fmt::Display,
    {
        match self.fields.get(i) {
            None => Ok(None),
            Some(v) if v.trim().is_empty() => Ok(None),
            Some(_) => self.parse(i, name).map(Some),
        }
    }
}

fn escape(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    for c in field.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

/// Writes the record encoding. Laughter counts are always written explicitly.
pub fn to_tsv(session: &Session) -> String {
    let h = session.header();
    let mut out = String::new();
    let row = |out: &mut String, fields: &[String]| {
        out.push_str(&fields.join("\t"));
        out.push('\n');
    };
    row(
        &mut out,
        &[
            "session".into(),
            escape(&h.dyad_id),
            h.session_index.to_string(),
            h.relationship.to_string(),
            escape(&h.speakers[0].id),
            escape(&h.speakers[0].gender),
            escape(&h.speakers[1].id),
            escape(&h.speakers[1].gender),
            h.duration.to_string(),
        ],
    );
    for u in session.utterances() {
        row(
            &mut out,
            &[
                "utterance".into(),
                escape(&u.speaker),
                u.start.to_string(),
                u.end.to_string(),
                escape(&u.text),
                u.clause_count.map(|c| c.to_string()).unwrap_or_default(),
                u.laughter_count.to_string(),
            ],
        );
    }
    for r in session.rapport_track().unwrap_or_default() {
        row(
            &mut out,
            &[
                "rapport".into(),
                r.slice_index.to_string(),
                r.rating.to_string(),
            ],
        );
    }
    for e in session.strategy_events().unwrap_or_default() {
        row(
            &mut out,
            &[
                "strategy".into(),
                e.strategy_kind.to_string(),
                escape(&e.speaker),
                e.timestamp_seconds.to_string(),
            ],
        );
    }
    out
}

#[derive(Serialize, Deserialize)]
struct JsonUtterance {
    speaker: String,
    start: f64,
    end: f64,
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    clause_count: Option<u32>,
    #[serde(default)]
    laughter_count: Option<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonSession {
    dyad_id: String,
    session_index: u8,
    relationship: Relationship,
    speakers: Vec<Speaker>,
    duration: f64,
    #[serde(default)]
    utterances: Vec<JsonUtterance>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    rapport: Vec<RapportRating>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    strategies: Vec<StrategyEvent>,
}

pub fn parse_json(input: &str) -> Result<Session, CorpusError> {
    let doc: JsonSession = serde_json::from_str(input).map_err(|e| {
        CorpusError::schema(
            format!("document (line {})", e.line()),
            "json",
            e.to_string(),
        )
    })?;
    let speakers: [Speaker; 2] = doc.speakers.try_into().map_err(|v: Vec<Speaker>| {
        CorpusError::SpeakerPair(format!("{} speakers declared", v.len()))
    })?;
    let header = SessionHeader {
        dyad_id: doc.dyad_id,
        session_index: doc.session_index,
        relationship: doc.relationship,
        speakers,
        duration: doc.duration,
    };
    let utterances = doc
        .utterances
        .into_iter()
        .map(|u| {
            Utterance::new(
                u.speaker,
                u.start,
                u.end,
                u.text,
                u.clause_count,
                u.laughter_count,
            )
        })
        .collect();
    Session::new(header, utterances, Some(doc.rapport), Some(doc.strategies))
}

pub fn to_json(session: &Session) -> String {
    let h = session.header().clone();
    let doc = JsonSession {
        dyad_id: h.dyad_id,
        session_index: h.session_index,
        relationship: h.relationship,
        speakers: h.speakers.to_vec(),
        duration: h.duration,
        utterances: session
            .utterances()
            .iter()
            .map(|u| JsonUtterance {
                speaker: u.speaker.clone(),
                start: u.start,
                end: u.end,
                text: u.text.clone(),
                clause_count: u.clause_count,
                laughter_count: Some(u.laughter_count),
            })
            .collect(),
        rapport: session.rapport_track().unwrap_or_default().to_vec(),
        strategies: session.strategy_events().unwrap_or_default().to_vec(),
    };
    serde_json::to_string_pretty(&doc).expect("session serializes")
}
