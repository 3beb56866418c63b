use thiserror::Error;

use crate::agent::AgentId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarketError {
    #[error("invalid pair {0} / {1}: agents must be on opposite sides")]
    InvalidPair(AgentId, AgentId),

    #[error("agent {0} is out of range for the market shape")]
    AgentOutOfRange(AgentId),

    #[error("invalid market shape: {0}")]
    InvalidShape(String),

    #[error("preference table has a non-finite entry at {0} -> {1}")]
    NonFinite(AgentId, usize),

    #[error("ambiguous preferences: tie in the row of {agent} between counterparts {first} and {second}")]
    Ties {
        agent: AgentId,
        first: usize,
        second: usize,
    },

    #[error("edge weights are not pairwise-unique: (u{0}, p{1}) and (u{2}, p{3}) share a weight")]
    NotPairwiseUnique(usize, usize, usize, usize),

    #[error("matching is infeasible: {0}")]
    Infeasible(String),

    #[error("instance too large to enumerate: {candidates} candidates exceed the budget of {budget}")]
    InstanceTooLarge { candidates: u128, budget: u128 },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("no warm-start sample for {0} -> {1}")]
    MissingWarmStart(AgentId, AgentId),

    #[error("tied preferences: {0} is zero")]
    ZeroGap(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("rule mismatch: trace ran under {trace}, report requested for {requested}")]
    RuleMismatch { trace: String, requested: String },
}

pub type Result<T, E = MarketError> = std::result::Result<T, E>;
