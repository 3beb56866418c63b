//! Preset experiments behind the subcommands.

use std::collections::BTreeMap;

use matchmarket::metrics::{
    extremal_matchings, growth_classifier, regret_curves, transient_cost_regret, GapStats, Growth, RegretReport,
};
use matchmarket::{
    enumerate_stable, payoff_table, AgentId, Matcher, RuleRegime64, Scenario64, Side, Trace64,
    DEFAULT_ENUMERATION_BUDGET,
};
use serde::Serialize;

use crate::batch::run_all;
use crate::error::{CliError, CliResult};
use crate::output::{agent_labels, bounds_json, classify, AgentMap, BoundsJson, GapsJson, Verdicts};
use crate::scenario::LoadedScenario;

pub fn scenarios_for(loaded: &LoadedScenario) -> Vec<Scenario64> {
    loaded.seeds.iter().map(|&s| loaded.with_seed(s)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumerateReport {
    pub rule: String,
    pub matchings: Vec<String>,
}

/// Stable set of the true instance under the scenario's rule.
pub fn enumerate(loaded: &LoadedScenario) -> CliResult<EnumerateReport> {
    let s = &loaded.scenario;
    let payoffs = payoff_table(&s.rule, &s.true_prefs)?;
    let set = enumerate_stable(&payoffs, DEFAULT_ENUMERATION_BUDGET)?;
    Ok(EnumerateReport {
        rule: s.rule.to_string(),
        matchings: set.iter().map(|m| m.dashed()).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub horizon: u64,
    pub sigma2: f64,
    pub alpha: f64,
    pub gaps: GapsJson,
    pub bounds: BoundsJson,
}

pub fn bounds(loaded: &LoadedScenario) -> CliResult<BoundsReport> {
    let s = &loaded.scenario;
    if s.horizon < 1 {
        return Err(CliError::invalid("horizon", "bounds need a horizon of at least 1"));
    }
    let gaps = GapStats::compute(&s.true_prefs, loaded.pricing.as_ref())?;
    Ok(BoundsReport {
        horizon: s.horizon,
        sigma2: s.sigma2,
        alpha: s.alpha,
        bounds: bounds_json(&gaps, s.sigma2, s.alpha, s.horizon)?,
        gaps: GapsJson::new(&gaps),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchCounts {
    pub seed: u64,
    /// Steps spent on each member of the true stable set, in canonical order.
    pub per_stable_matching: Vec<u64>,
    /// Steps whose matching is outside the true stable set.
    pub outside_stable_set: u64,
    /// `sum(per_stable_matching) >= T - outside_stable_set`.
    pub identity_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Example1Report {
    pub stable_set: Vec<String>,
    pub checkpoints: Vec<u64>,
    pub optimal: AgentMap<Vec<f64>>,
    pub pessimal: AgentMap<Vec<f64>>,
    pub classifier: Option<AgentMap<Verdicts>>,
    pub counts: Vec<MatchCounts>,
    #[serde(skip)]
    pub report: RegretReport<f64>,
}

/// Zero-rule batch with providers proposing. The preference source is taken
/// from the scenario file.
pub fn example1_linear(loaded: &LoadedScenario) -> CliResult<Example1Report> {
    if loaded.checkpoints.is_empty() {
        return Err(CliError::invalid("horizon", "the experiment needs a positive horizon"));
    }
    let rule = RuleRegime64::Zero;
    let scenarios: Vec<Scenario64> = scenarios_for(loaded)
        .into_iter()
        .map(|s| Scenario64 {
            rule: rule.clone(),
            matcher: Matcher::GaleShapley,
            proposer: Side::Provider,
            pricing_bound: None,
            ..s
        })
        .collect();
    let traces = run_all(&scenarios)?;
    let s = &scenarios[0];
    let ex = extremal_matchings(&s.true_prefs, &rule, DEFAULT_ENUMERATION_BUDGET)?;
    let report = regret_curves(&traces, &ex, &rule, &loaded.checkpoints)?;
    let counts = traces
        .iter()
        .map(|t| {
            let mut per = vec![0u64; ex.stable_set.len()];
            let mut outside = 0;
            for r in &t.records {
                match ex.stable_set.matchings().binary_search(&r.matching) {
                    Ok(i) => per[i] += 1,
                    Err(_) => outside += 1,
                }
            }
            let horizon = t.records.len() as u64;
            MatchCounts {
                seed: t.scenario.seed,
                identity_holds: per.iter().sum::<u64>() + outside >= horizon,
                per_stable_matching: per,
                outside_stable_set: outside,
            }
        })
        .collect();
    let labels = agent_labels(s.shape());
    Ok(Example1Report {
        stable_set: ex.stable_set.iter().map(|m| m.dashed()).collect(),
        checkpoints: report.checkpoints.clone(),
        optimal: labels.iter().cloned().zip(report.optimal.iter().cloned()).collect(),
        pessimal: labels.iter().cloned().zip(report.pessimal.iter().cloned()).collect(),
        classifier: classify(&report)?,
        counts,
        report,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AdversaryReport {
    pub checkpoints: Vec<u64>,
    /// Optimal regret with the exploration cost, for the pinned and the
    /// randomized provider.
    pub pinned: Vec<f64>,
    pub randomized: Vec<f64>,
    pub pinned_verdict: Option<Growth>,
    pub randomized_verdict: Option<Growth>,
    /// Largest true-mean optimal regret of any agent; payoffs vanish
    /// identically, so this is zero.
    pub max_true_mean_regret: f64,
    pub welfare_always_zero: bool,
    pub always_stable: bool,
    #[serde(skip)]
    pub report: RegretReport<f64>,
    #[serde(skip)]
    pub traces: Vec<Trace64>,
}

/// Proportional costs with `gamma = 1` under the pinned-random scheduler.
pub fn prop3_adversary(loaded: &LoadedScenario) -> CliResult<AdversaryReport> {
    if loaded.checkpoints.is_empty() {
        return Err(CliError::invalid("horizon", "the experiment needs a positive horizon"));
    }
    if loaded.shape().n_providers < 2 {
        return Err(CliError::invalid("preferences", "the scheduler needs at least two providers"));
    }
    let rule = RuleRegime64::Proportional { gamma: 1.0 };
    let scenarios: Vec<Scenario64> = scenarios_for(loaded)
        .into_iter()
        .map(|s| Scenario64 {
            rule: rule.clone(),
            matcher: Matcher::PinnedRandom,
            pricing_bound: None,
            ..s
        })
        .collect();
    let traces = run_all(&scenarios)?;
    let report = transient_cost_regret(&traces, &loaded.checkpoints)?;
    let ex = extremal_matchings(&scenarios[0].true_prefs, &rule, DEFAULT_ENUMERATION_BUDGET)?;
    let true_mean = regret_curves(&traces, &ex, &rule, &loaded.checkpoints)?;
    let max_true_mean_regret = true_mean.optimal.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));

    let pinned = report.optimal[report.shape.agent_slot(AgentId::provider(0))].clone();
    let randomized = report.optimal[report.shape.agent_slot(AgentId::provider(1))].clone();
    let verdict = |a: AgentId| -> CliResult<Option<Growth>> {
        if report.checkpoints.len() < 4 {
            return Ok(None);
        }
        Ok(Some(growth_classifier(&report.optimal_curve(a))?))
    };
    let records = || traces.iter().flat_map(|t| &t.records);
    Ok(AdversaryReport {
        checkpoints: report.checkpoints.clone(),
        pinned_verdict: verdict(AgentId::provider(0))?,
        randomized_verdict: verdict(AgentId::provider(1))?,
        pinned,
        randomized,
        max_true_mean_regret,
        welfare_always_zero: records().all(|r| r.welfare == 0.0 && r.welfare_max == 0.0),
        always_stable: records().all(|r| r.stable),
        report,
        traces,
    })
}

/// Per-agent final values of a report, for printing.
pub fn final_values(report: &RegretReport<f64>) -> BTreeMap<String, (f64, f64)> {
    report
        .shape
        .agents()
        .map(|a| (a.to_string(), (report.final_optimal(a), report.final_pessimal(a))))
        .collect()
}
