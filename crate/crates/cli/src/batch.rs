use matchmarket::{run, Scenario64, Trace64};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};

/// Environment variable capping batch parallelism.
pub const THREADS_ENV: &str = "MATCHMARKET_THREADS";

fn thread_cap() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::invalid(THREADS_ENV, format!("expected a positive integer, got `{v}`"))),
        },
    }
}

/// Runs every scenario, in parallel up to the thread cap. Results keep the
/// input order.
pub fn run_all(scenarios: &[Scenario64]) -> CliResult<Vec<Trace64>> {
    let work = || {
        scenarios
            .par_iter()
            .map(|s| run(s).map_err(CliError::from))
            .collect::<CliResult<Vec<_>>>()
    };
    match thread_cap()? {
        None => work(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Pool(e.to_string()))?
            .install(work),
    }
}
