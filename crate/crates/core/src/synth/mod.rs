//! Seeded synthetic dyads with planted ground truth.
//!
//! Every generator draws from [`rng::SynthRng`] sub-streams of the [`SynthSpec`] seed,
//! so identical specs give bit-identical output on every platform.

pub mod rng;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::EventSeries;
use crate::corpus::{
    RapportRating, Relationship, Session, SessionHeader, Speaker, StrategyEvent, StrategyKind,
    Utterance, LAUGHTER_MARKER, SLICE_WIDTH,
};
use rng::SynthRng;

pub const MIN_SLICES: usize = 20;

const FEATURE_STREAM: u64 = 1;
const RAPPORT_STREAM: u64 = 2;
const EVENT_STREAM: u64 = 3;
const TRANSCRIPT_STREAM: u64 = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("AR coefficient must lie in (-1, 1), got {0}")]
    InvalidAr(f64),
    #[error("need at least {MIN_SLICES} slices, got {0}")]
    TooFewSlices(usize),
    #[error("{0} must be finite and non-negative, got {1}")]
    InvalidParameter(&'static str, f64),
    #[error("strategy event rate must be positive, got {0}")]
    InvalidRate(f64),
    #[error("no planted causality configured")]
    MissingCausality,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedCausality {
    pub strength: f64,
    /// In slices, at least 1.
    pub lag: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    pub n_slices: usize,
    /// Stationary partner difference when true, a random walk otherwise.
    pub convergent: bool,
    pub ar_coefficient: f64,
    pub noise_sd: f64,
    pub planted_causality: Option<PlantedCausality>,
    /// Strategy events per minute.
    pub strategy_event_rate: f64,
    /// Seconds by which the partner echoes each event.
    pub reciprocity: f64,
    pub jitter_sd: f64,
    /// Mean of speaker A's feature series.
    pub base_level: f64,
    /// Generate algebra-tutoring text instead of generic filler.
    pub math_text: bool,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            n_slices: 120,
            convergent: true,
            ar_coefficient: 0.5,
            noise_sd: 1.0,
            planted_causality: None,
            strategy_event_rate: 1.0,
            reciprocity: 10.0,
            jitter_sd: 2.0,
            base_level: 8.0,
            math_text: false,
        }
    }
}

impl SynthSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn duration(&self) -> f64 {
        self.n_slices as f64 * SLICE_WIDTH
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_slices < MIN_SLICES {
            return Err(SynthError::TooFewSlices(self.n_slices));
        }
        if !(self.ar_coefficient.abs() < 1.0) {
            return Err(SynthError::InvalidAr(self.ar_coefficient));
        }
        for (name, v) in [
            ("noise_sd", self.noise_sd),
            ("reciprocity", self.reciprocity),
            ("jitter_sd", self.jitter_sd),
            ("base_level", self.base_level),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(SynthError::InvalidParameter(name, v));
            }
        }
        if let Some(p) = self.planted_causality {
            if !p.strength.is_finite() {
                return Err(SynthError::InvalidParameter("strength", p.strength));
            }
            if p.lag == 0 {
                return Err(SynthError::InvalidParameter("lag", 0.0));
            }
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> SynthRng {
        SynthRng::with_stream(self.seed, stream)
    }
}

/// AR(φ) path started from its stationary distribution.
fn ar_path(rng: &mut SynthRng, phi: f64, sd: f64, n: usize) -> Vec<f64> {
    let mut x = sd * rng.normal() / (1.0 - phi * phi).sqrt();
    (0..n)
        .map(|_| {
            let v = x;
            x = phi * x + sd * rng.normal();
            v
        })
        .collect()
}

/// `(A, B)` with `B = A − d`, where `d` is AR(φ) when convergent and a
/// random walk otherwise.
pub fn gen_feature_pair(spec: &SynthSpec) -> Result<(Vec<f64>, Vec<f64>), SynthError> {
    spec.validate()?;
    let n = spec.n_slices;
    let mut rng = spec.rng(FEATURE_STREAM);
    let a = ar_path(&mut rng, 0.5, spec.noise_sd, n)
        .into_iter()
        .map(|v| spec.base_level + v)
        .collect::<Vec<_>>();
    let d = if spec.convergent {
        ar_path(&mut rng, spec.ar_coefficient, spec.noise_sd, n)
    } else {
        let mut level = 0.0;
        (0..n)
            .map(|_| {
                level += spec.noise_sd * rng.normal();
                level
            })
            .collect()
    };
    let b = a.iter().zip(&d).map(|(x, y)| x - y).collect();
    Ok((a, b))
}

/// `(rapport, difference)`: rapport is AR(φ) around 4 and the partner
/// difference falls by `strength` per unit of rapport `lag` slices earlier.
pub fn gen_rapport_driven(spec: &SynthSpec) -> Result<(Vec<f64>, Vec<f64>), SynthError> {
    spec.validate()?;
    let planted = spec.planted_causality.ok_or(SynthError::MissingCausality)?;
    let n = spec.n_slices;
    let mut rng = spec.rng(RAPPORT_STREAM);
    let r = ar_path(&mut rng, spec.ar_coefficient, 1.0, n + planted.lag);
    let diff = (0..n)
        .map(|t| spec.base_level - planted.strength * r[t] + spec.noise_sd * rng.normal())
        .collect();
    let rapport = r[planted.lag..].iter().map(|v| 4.0 + v).collect();
    Ok((rapport, diff))
}

fn poisson_times(rng: &mut SynthRng, rate_per_second: f64, duration: f64) -> Vec<f64> {
    let mut times = Vec::new();
    let mut t = rng.exponential(rate_per_second);
    while t < duration {
        times.push(t);
        t += rng.exponential(rate_per_second);
    }
    times
}

fn echo(rng: &mut SynthRng, times: &[f64], spec: &SynthSpec) -> Vec<f64> {
    let duration = spec.duration();
    let mut out: Vec<f64> = times
        .iter()
        .map(|t| (t + spec.reciprocity + spec.jitter_sd * rng.normal()).clamp(0.0, duration))
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Speaker A's events are a Poisson process; B echoes each one after the
/// reciprocity lag plus Gaussian jitter.
pub fn gen_strategy_events(
    spec: &SynthSpec,
    kind: StrategyKind,
    speakers: [&str; 2],
) -> Result<(EventSeries, EventSeries), SynthError> {
    spec.validate()?;
    if !(spec.strategy_event_rate > 0.0 && spec.strategy_event_rate.is_finite()) {
        return Err(SynthError::InvalidRate(spec.strategy_event_rate));
    }
    let stream = EVENT_STREAM
        + StrategyKind::ALL
            .iter()
            .position(|k| *k == kind)
            .unwrap_or(0) as u64;
    let mut rng = spec.rng(stream);
    let a = poisson_times(&mut rng, spec.strategy_event_rate / 60.0, spec.duration());
    let b = echo(&mut rng, &a, spec);
    Ok((
        EventSeries {
            kind,
            speaker: speakers[0].to_string(),
            timestamps: a,
        },
        EventSeries {
            kind,
            speaker: speakers[1].to_string(),
            timestamps: b,
        },
    ))
}

const FILLER: &[&str] = &[
    "we", "should", "look", "at", "this", "part", "again", "because", "it", "seems", "right",
    "maybe", "next", "one", "looks", "good", "think", "about", "answer", "question", "really",
    "sure", "know", "way", "try",
];
const MATH: &[&str] = &[
    "add", "subtract", "divide", "multiply", "both", "sides", "by", "x", "3", "5", "equation",
    "variable", "number", "terms", "simplify", "isolate", "the", "then", "so", "we", "get",
    "answer", "left", "side",
];

fn sentence(rng: &mut SynthRng, words: usize, math: bool) -> String {
    let vocab = if math { MATH } else { FILLER };
    let mut out = String::new();
    for i in 0..words {
        if i > 0 {
            // a clause boundary roughly every five words
            out.push_str(if rng.bernoulli(0.2) { ". " } else { " " });
        }
        out.push_str(vocab[rng.range(0, vocab.len() as u64 - 1) as usize]);
    }
    out.push('.');
    out
}

/// Words per speaker per slice at the base level.
const WORDS_PER_SLICE: f64 = 40.0;
/// Words per unit of the planted feature series.
const WORDS_PER_UNIT: f64 = 2.0;

fn slice_words(level: f64, base: f64) -> usize {
    (WORDS_PER_SLICE + WORDS_PER_UNIT * (level - base))
        .round()
        .max(2.0) as usize
}

/// Identity of a generated session inside a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionId {
    pub dyad_id: String,
    pub session_index: u8,
    pub relationship: Relationship,
}

fn header(id: &SessionId, duration: f64) -> SessionHeader {
    SessionHeader {
        dyad_id: id.dyad_id.clone(),
        session_index: id.session_index,
        relationship: id.relationship,
        speakers: [
            Speaker {
                id: format!("{}a", id.dyad_id),
                gender: "f".into(),
            },
            Speaker {
                id: format!("{}b", id.dyad_id),
                gender: "m".into(),
            },
        ],
        duration,
    }
}

/// Full transcript with planted structure. Each slice holds two turns per
/// speaker whose word totals follow [`gen_feature_pair`], so the partner
/// difference in words is the planted difference series up to rounding.
/// Rapport is rated every slice and strategies follow
/// [`gen_strategy_events`]. Every utterance stays inside one slice; some
/// start before the partner's previous turn ends.
pub fn gen_session(spec: &SynthSpec, id: &SessionId) -> Result<Session, SynthError> {
    spec.validate()?;
    let header = header(id, spec.duration());
    let ids = [header.speakers[0].id.clone(), header.speakers[1].id.clone()];
    let (level_a, level_b) = gen_feature_pair(spec)?;
    let mut rng = spec.rng(TRANSCRIPT_STREAM);
    let mut utterances = Vec::new();
    for t in 0..spec.n_slices {
        let slice_start = t as f64 * SLICE_WIDTH;
        let first = rng.range(0, 1) as usize;
        let totals = [
            slice_words(level_a[t], spec.base_level),
            slice_words(level_b[t], spec.base_level),
        ];
        let slot = SLICE_WIDTH / 4.0;
        for k in 0..4 {
            let who = (first + k) % 2;
            let words = if k < 2 {
                totals[who] / 2
            } else {
                totals[who] - totals[who] / 2
            };
            let mut start = slice_start + k as f64 * slot;
            if k > 0 && rng.bernoulli(0.2) {
                start -= 0.15 * slot;
            }
            let end = slice_start + (k as f64 + 0.9) * slot;
            let mut text = sentence(&mut rng, words, spec.math_text);
            if rng.bernoulli(0.05) {
                text.push(' ');
                text.push_str(LAUGHTER_MARKER);
            }
            utterances.push(Utterance::new(
                ids[who].clone(),
                start,
                end,
                text,
                None,
                None,
            ));
        }
    }
    let mut rrng = spec.rng(RAPPORT_STREAM);
    let rapport = ar_path(&mut rrng, 0.7, 1.0, spec.n_slices)
        .into_iter()
        .enumerate()
        .map(|(slice_index, v)| RapportRating {
            slice_index,
            rating: (4.0 + v).round().clamp(1.0, 7.0),
        })
        .collect();
    let mut events = Vec::new();
    for kind in StrategyKind::ALL {
        let (a, b) = gen_strategy_events(spec, kind, [&ids[0], &ids[1]])?;
        for series in [a, b] {
            for t in series.timestamps {
                events.push(StrategyEvent {
                    strategy_kind: kind,
                    speaker: series.speaker.clone(),
                    timestamp_seconds: t,
                });
            }
        }
    }
    events.sort_by(|x, y| x.timestamp_seconds.total_cmp(&y.timestamp_seconds));
    Ok(
        Session::new(header, utterances, Some(rapport), Some(events))
            .expect("generated session is valid"),
    )
}

/// Unstructured transcript whose utterances freely straddle slice
/// boundaries, for conservation checks.
pub fn gen_random_session(seed: u64, n_slices: usize) -> Session {
    let mut rng = SynthRng::with_stream(seed, TRANSCRIPT_STREAM + 1);
    let duration = n_slices as f64 * SLICE_WIDTH;
    let id = SessionId {
        dyad_id: format!("r{seed}"),
        session_index: 1,
        relationship: Relationship::Strangers,
    };
    let header = header(&id, duration);
    let count = rng.range(n_slices as u64, 4 * n_slices as u64);
    let utterances = (0..count)
        .map(|_| {
            let who = rng.range(0, 1) as usize;
            let start = rng.uniform() * duration;
            let end = (start + rng.exponential(1.0 / 8.0)).min(duration);
            let words = rng.range(1, 25) as usize;
            let text = sentence(&mut rng, words, false);
            Utterance::new(
                header.speakers[who].id.clone(),
                start,
                end,
                text,
                None,
                None,
            )
        })
        .collect();
    Session::new(header, utterances, None, None).expect("generated session is valid")
}

/// Spec of session `session` (1-based) of dyad `dyad` (0-based) in a
/// corpus generated from `base`: dyads alternate between convergent and
/// divergent (when `base` is convergent) and each session has its own seed.
pub fn corpus_session_spec(base: &SynthSpec, dyad: usize, session: u8) -> SynthSpec {
    SynthSpec {
        seed: base
            .seed
            .wrapping_mul(1_000_003)
            .wrapping_add((dyad as u64) << 8 | u64::from(session)),
        convergent: base.convergent && dyad.is_multiple_of(2),
        ..base.clone()
    }
}

/// `n_dyads × sessions_per_dyad` sessions following [`corpus_session_spec`];
/// dyads alternate between friends and strangers.
pub fn gen_corpus(
    base: &SynthSpec,
    n_dyads: usize,
    sessions_per_dyad: u8,
) -> Result<Vec<Session>, SynthError> {
    let mut out = Vec::new();
    for d in 0..n_dyads {
        for s in 1..=sessions_per_dyad {
            let id = SessionId {
                dyad_id: format!("d{:02}", d + 1),
                session_index: s,
                relationship: if d.is_multiple_of(2) {
                    Relationship::Friends
                } else {
                    Relationship::Strangers
                },
            };
            out.push(gen_session(&corpus_session_spec(base, d, s), &id)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::{dtw, DtwOptions};
    use crate::stats::spearman;
    use crate::tsa::{adf_test, difference, granger_causes, AdfSpec};

    #[test]
    fn deterministic_per_seed() {
        let spec = SynthSpec::with_seed(9);
        assert_eq!(
            gen_feature_pair(&spec).unwrap(),
            gen_feature_pair(&spec).unwrap()
        );
        let id = SessionId {
            dyad_id: "d1".into(),
            session_index: 1,
            relationship: Relationship::Friends,
        };
        assert_eq!(
            gen_session(&spec, &id).unwrap(),
            gen_session(&spec, &id).unwrap()
        );
        assert_ne!(
            gen_feature_pair(&SynthSpec::with_seed(10)).unwrap(),
            gen_feature_pair(&spec).unwrap()
        );
    }

    #[test]
    fn invalid_specs() {
        let bad = SynthSpec {
            ar_coefficient: 1.0,
            ..SynthSpec::default()
        };
        assert_eq!(gen_feature_pair(&bad), Err(SynthError::InvalidAr(1.0)));
        let short = SynthSpec {
            n_slices: 19,
            ..SynthSpec::default()
        };
        assert_eq!(gen_feature_pair(&short), Err(SynthError::TooFewSlices(19)));
        assert_eq!(
            gen_rapport_driven(&SynthSpec::default()),
            Err(SynthError::MissingCausality)
        );
    }

    fn converged_count(convergent: bool, ar_coefficient: f64) -> usize {
        (0..100)
            .filter(|&seed| {
                let spec = SynthSpec {
                    seed,
                    convergent,
                    ar_coefficient,
                    ..SynthSpec::default()
                };
                let (a, b) = gen_feature_pair(&spec).unwrap();
                let d = difference(&a, &b, 0).unwrap();
                adf_test(&d, &AdfSpec::default()).unwrap().converged
            })
            .count()
    }

    #[test]
    fn planted_convergence_is_recovered() {
        assert!(converged_count(true, 0.0) >= 95);
        // the test's power at φ = 0.5 and 117 rows is about 0.94 (2000 seeds)
        let c = converged_count(true, 0.5);
        assert!(c >= 88, "{c}");
        assert!(converged_count(false, 0.5) <= 5);
    }

    fn granger_rate(strength: f64, reverse: bool) -> usize {
        (0..100)
            .filter(|&seed| {
                let spec = SynthSpec {
                    seed,
                    planted_causality: Some(PlantedCausality { strength, lag: 1 }),
                    ..SynthSpec::default()
                };
                let (r, d) = gen_rapport_driven(&spec).unwrap();
                let res = if reverse {
                    granger_causes(&r, &d, 3)
                } else {
                    granger_causes(&d, &r, 3)
                };
                res.unwrap().significant
            })
            .count()
    }

    #[test]
    fn planted_causality_is_recovered() {
        assert!(granger_rate(0.8, false) >= 90);
        assert!(granger_rate(0.0, false) <= 12);
    }

    #[test]
    fn events_echo() {
        let spec = SynthSpec {
            seed: 4,
            reciprocity: 0.0,
            jitter_sd: 0.0,
            ..SynthSpec::default()
        };
        let (a, b) = gen_strategy_events(&spec, StrategyKind::Praise, ["p", "q"]).unwrap();
        assert!(!a.timestamps.is_empty());
        assert_eq!(a.timestamps, b.timestamps);
        assert_eq!(
            dtw(&a.timestamps, &b.timestamps, DtwOptions::default())
                .unwrap()
                .normalized_distance,
            0.0
        );
    }

    #[test]
    fn larger_reciprocity_lag_widens_dtw() {
        let lags: Vec<f64> = (0..20).map(|l| l as f64 * 2.0).collect();
        let means: Vec<f64> = lags
            .iter()
            .map(|&lag| {
                (0..50)
                    .map(|seed| {
                        let spec = SynthSpec {
                            seed,
                            reciprocity: lag,
                            jitter_sd: 1.0,
                            ..SynthSpec::default()
                        };
                        let (a, b) =
                            gen_strategy_events(&spec, StrategyKind::SelfDisclosure, ["p", "q"])
                                .unwrap();
                        dtw(&a.timestamps, &b.timestamps, DtwOptions::default())
                            .unwrap()
                            .normalized_distance
                    })
                    .sum::<f64>()
                    / 50.0
            })
            .collect();
        assert!(
            spearman(&lags, &means).unwrap().coefficient >= 0.8,
            "{means:?}"
        );
    }

    #[test]
    fn corpus_shape() {
        let corpus = gen_corpus(
            &SynthSpec {
                n_slices: 20,
                ..SynthSpec::default()
            },
            2,
            2,
        )
        .unwrap();
        assert_eq!(corpus.len(), 4);
        assert_eq!(corpus[3].dyad_id(), "d02");
        assert_eq!(corpus[3].relationship(), Relationship::Strangers);
        assert!(corpus[0].strategy_events().is_some());
        assert_eq!(corpus[0].rapport_track().unwrap().len(), 20);
        let r = gen_random_session(3, 20);
        assert!(r.utterances().len() >= 20);
    }
}
