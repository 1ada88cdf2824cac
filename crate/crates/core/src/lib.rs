//! Behavioral convergence analytics for two-party conversations.
//!
//! The crate turns timestamped dyadic transcripts into measures of how the two
//! partners come to resemble each other over a session:
//!
//! - [`corpus`]: transcript ingestion and fixed-width time slicing.
//! - [`paraling`]: per-slice lexical and temporal features for each speaker.
//! - [`tsa`]: differencing, unit-root convergence tests, composite strength and
//!   Granger causality.
//! - [`align`]: dynamic time warping of conversational strategy event times.
//! - [`conceptnet`]: concept maps built from transcripts, their intersection
//!   and shared-structure statistics.
//! - [`stats`]: correlations, paired t-test, reference distributions and a
//!   dummy-coded OLS outcome model.
//! - [`synth`]: seeded generators with planted ground truth for every analysis.

pub mod align;
pub mod conceptnet;
pub mod corpus;
pub mod paraling;
pub mod stats;
pub mod synth;
pub mod tsa;

pub use align::{dtw, strategy_alignment, AlignError, AlignmentResult, DtwOptions};
pub use conceptnet::{build_map, intersect, map_stats, preprocess, ConceptMap, Lexicon, MapStats};
pub use corpus::{segment, CorpusError, Session, Slice};
pub use paraling::{extract_series, Feature, FeatureSeries, FeatureVector};
pub use tsa::{adf_test, granger_causes, AdfResult, AdfSpec, GrangerResult, TsaError};
