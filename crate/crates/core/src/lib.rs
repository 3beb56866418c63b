//! Centralized two-sided matching market in which both sides learn their
//! preferences through UCB indices while a platform recomputes a stable
//! matching each round under a configurable cost and transfer rule.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below fix the common case.

pub mod agent;
pub mod bandit;
pub mod error;
pub mod generate;
pub mod market;
pub mod matching;
pub mod metrics;
pub mod payoff;
pub mod prefs;
pub mod reward;
pub mod rules;
pub mod scalar;
pub mod stable;

pub use agent::{AgentId, MarketShape, Side};
pub use bandit::{ucb_bonus, LearnerState};
pub use error::{MarketError, Result};
pub use market::{run, step, Matcher, Scenario, StepRecord, Trace};
pub use matching::{feasibility_check, Matching, Violation};
pub use payoff::{blocking_pair, is_stable, matched_payoff, payoff, payoff_table};
pub use prefs::PreferenceTable;
pub use reward::RewardDist;
pub use rules::{cost, pricing_defaults, pricing_defaults_natural, transfer, PricingParams, RuleRegime};
pub use scalar::Scalar;
pub use stable::{
    enumerate_stable, gs_propose, greedy_balanced, greedy_matching, max_weight_matching, unique_stable, StableSet,
    WeightMatrix, DEFAULT_ENUMERATION_BUDGET,
};

pub type PreferenceTable64 = PreferenceTable<f64>;
pub type PreferenceTable32 = PreferenceTable<f32>;
pub type RuleRegime64 = RuleRegime<f64>;
pub type Scenario64 = Scenario<f64>;
pub type Trace64 = Trace<f64>;
pub type LearnerState64 = LearnerState<f64>;
pub type WeightMatrix64 = WeightMatrix<f64>;
pub type PricingParams64 = PricingParams<f64>;
