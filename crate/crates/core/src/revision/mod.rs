//! Replaying recorded trees under candidate weights, and searching the
//! weight space for a better knowledge base.

mod perf;
mod pipeline;
mod replay;
mod search;

use thiserror::Error;

use crate::knowledge::KnowledgeError;

pub use perf::{perf, perf_value, PerfReport};
pub use pipeline::{replay_perf, revise, Revision};
pub use replay::{replay_kb, PreparedTrace, ReplayOutcome, ReplayStats};
pub use search::{
    neighborhood, reactive_local_search, Move, SearchLogEntry, SearchResult, SearchSchedule,
    Solution,
};

#[derive(Debug, Error)]
pub enum RevisionError {
    #[error("trace for `{0}` is incomplete (a search limit was hit)")]
    Incomplete(String),
    #[error("trace for `{0}` has no nodes")]
    EmptyTrace(String),
    #[error("no problems to evaluate")]
    NoProblems,
    #[error("trace for `{0}` comes from a different domain or catalog")]
    CatalogMismatch(String),
    #[error("problem `{problem}`, node {node}: measures of action `{action}` fall in no area")]
    NoArea {
        problem: String,
        node: usize,
        action: String,
    },
    #[error("weight {weight} outside 0..={weight_max}")]
    WeightOutOfRange { weight: u32, weight_max: u32 },
    #[error("invalid search schedule: {0}")]
    Schedule(String),
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
}
