//! Matching algorithms: deferred acceptance from either side, the greedy
//! matcher for symmetric payoffs, exhaustive stable-set enumeration and an
//! exact assignment solver.

mod assignment;
mod enumerate;
mod gale_shapley;
mod greedy;

pub use assignment::{max_weight_matching, WeightMatrix};
pub use enumerate::{enumerate_stable, for_each_feasible, StableSet, DEFAULT_ENUMERATION_BUDGET};
pub use gale_shapley::{gs_propose, unique_stable};
pub use greedy::{balanced_weights, greedy_balanced, greedy_matching};
