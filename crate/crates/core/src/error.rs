use thiserror::Error;

use crate::model::UnitId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Counters reported when forest construction hits one of its limits.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExpansionStats {
    pub nodes: usize,
    pub expanded: usize,
    pub max_depth_reached: usize,
    pub largest_product: usize,
}

impl std::fmt::Display for ExpansionStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} nodes built, {} expanded, depth {}, largest product {}",
            self.nodes, self.expanded, self.max_depth_reached, self.largest_product
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("object label is empty")]
    EmptyLabel,
    #[error("motion label is empty")]
    EmptyMotion,
    #[error("functional unit has no input objects")]
    NoInputs,
    #[error("functional unit has no output objects")]
    NoOutputs,
    #[error("nothing to merge")]
    NothingToMerge,
    #[error("subgraph `{0}` has no functional units")]
    EmptySubgraph(String),

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("no functional units")]
    NoUnits,
    #[error("profile: {0}")]
    Profile(String),
    #[error("profile: rate for `{key}` must be in (0, 1], got {value}")]
    RateOutOfRange { key: String, value: f64 },
    #[error("structured document: {0}")]
    Structured(String),

    #[error("goal not producible: no functional unit outputs {0}")]
    GoalNotProducible(String),
    #[error("expansion limit exceeded ({limit}): {stats}")]
    ExpansionLimitExceeded {
        limit: &'static str,
        stats: ExpansionStats,
    },
    #[error("planning failure: no satisfiable task tree for {0}")]
    PlanningFailure(String),
    #[error("no executable tree")]
    NoExecutableTree,

    #[error("assistant would perform the entire task (m = {m}, tree length {len})")]
    AssistantWouldPerformEntireTask { m: usize, len: usize },
    #[error("M exceeds all tree lengths (m = {0})")]
    MExceedsAllTrees(usize),
    #[error("improvement threshold must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("no candidate task trees")]
    NoTrees,
    #[error("unit {0} is not part of the network")]
    UnknownUnit(UnitId),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
