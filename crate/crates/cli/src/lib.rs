//! Scenario loading, batch execution and the preset experiments of the
//! `matchmarket` command.

pub mod batch;
pub mod error;
pub mod experiments;
pub mod output;
pub mod scenario;

pub use error::{CliError, CliResult};
pub use scenario::{load_scenario, parse_scenario, LoadedScenario, ScenarioFile};
