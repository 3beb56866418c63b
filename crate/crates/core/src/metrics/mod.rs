//! Post-processing of traces: gaps, regret, bounds, welfare and a growth
//! heuristic for finite horizons.

mod bounds;
mod gaps;
mod growth;
mod regret;
mod welfare;

pub use bounds::{bound_formula, theoretical_bound, BoundKind};
pub use gaps::GapStats;
pub use growth::{geometric_checkpoints, growth_classifier, Growth};
pub use regret::{
    expected_payoffs, extremal_matchings, regret_curves, transient_cost_regret, Extremal, RegretReport,
};
pub use welfare::{min_welfare_ratio, welfare_ratio_series, WelfareRatio};
