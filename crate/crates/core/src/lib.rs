//! Information compression by multiple alignment, unification and search.
//!
//! A New pattern is aligned against stored Old patterns; each alignment is
//! scored by how much the New information can be compressed by encoding it
//! in terms of the Old patterns it matches.

pub mod alignment;
pub mod corpus;
pub mod engine;
pub mod error;
pub mod io;
pub mod learn;
pub mod matcher;
pub mod probability;
pub mod scoring;

pub use alignment::{
    Alignment, CanonicalKey, Cell, Column, Node, Origin, Row, RowSource, UnifiedSequence,
};
pub use corpus::{Corpus, Pattern, PatternId, SymbolId, SymbolTable};
pub use engine::{EngineParams, RankedAlignment, RunResult, RunStatus, ScoredAlignment};
pub use error::{Error, Result};
pub use matcher::{MatchChain, MatchParams, MatchPoint};
pub use probability::{ProbabilityGroup, ProbabilityReport};
pub use scoring::{ChainScorer, CostConfig, CostModel, ScoreBreakdown};
