//! Unithood determination for word-sequence pairs.
//!
//! Candidate pairs `(a_x, b, a_y)` are extracted from POS-tagged text
//! ([`extract`]), their document counts are gathered from a local index or
//! a cached search endpoint ([`counts`]), and each pair is scored by the
//! odds of unithood alongside the MI-based UH function ([`measures`]).
//! Merge decisions are evaluated against gold labels in [`eval`].

pub mod counts;
pub mod error;
pub mod eval;
pub mod extract;
pub mod measures;
pub mod pipeline;
mod score;

pub use counts::{CountProvider, CountSnapshot, LocalIndex, PhraseQuery};
pub use error::{Error, Result};
pub use eval::{ContingencyTable, GoldSet, Metrics, SweepPoint};
pub use extract::{CandidatePair, NounPhrase, PairRecord, TaggedSentence, TaggedToken};
pub use measures::{Decision, JointSource, OuConfig, UhThresholds};
pub use pipeline::{ScoredRecord, ScoringConfig};
pub use score::Score;
