//! Trace CSV and summary JSON.

use std::collections::BTreeMap;
use std::path::Path;

use matchmarket::metrics::{
    extremal_matchings, growth_classifier, min_welfare_ratio, regret_curves, theoretical_bound, welfare_ratio_series,
    BoundKind, GapStats, Growth, RegretReport,
};
use matchmarket::{MarketError, MarketShape, Trace64, DEFAULT_ENUMERATION_BUDGET};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::scenario::{LoadedScenario, ScenarioFile};

/// Agent labels in slot order.
pub fn agent_labels(shape: MarketShape) -> Vec<String> {
    shape.agents().map(|a| a.to_string()).collect()
}

/// One row per step: `t, matching, U_<agent>..., W_t, W_max, stable`.
pub fn trace_csv(trace: &Trace64) -> CliResult<Vec<u8>> {
    let labels = agent_labels(trace.scenario.shape());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string(), "matching".to_string()];
    header.extend(labels.iter().map(|l| format!("U_{l}")));
    header.extend(["W_t", "W_max", "stable"].map(String::from));
    w.write_record(&header)?;
    for r in &trace.records {
        let mut row = vec![r.t.to_string(), r.matching.dashed()];
        row.extend(r.payoffs.iter().map(|u| u.to_string()));
        row.push(r.welfare.to_string());
        row.push(r.welfare_max.to_string());
        row.push(r.stable.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| CliError::Write {
        path: "<trace>".into(),
        source,
    })?;
    Ok(w.into_inner().map_err(|e| CliError::Pool(e.to_string()))?)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| CliError::Write {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, bytes).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub type AgentMap<V> = BTreeMap<String, V>;

fn per_agent<V: Clone>(labels: &[String], values: &[V]) -> AgentMap<V> {
    labels.iter().cloned().zip(values.iter().cloned()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GapsJson {
    pub delta_min: f64,
    pub delta_max: AgentMap<f64>,
    pub delta_rho_min: f64,
    pub delta_rho_max_star: Option<AgentMap<f64>>,
    pub delta_b_max_star: Option<AgentMap<f64>>,
    pub rho_matching: Option<String>,
    pub pricing_matching: Option<String>,
}

impl GapsJson {
    pub fn new(gaps: &GapStats<f64>) -> Self {
        let labels = agent_labels(gaps.shape);
        GapsJson {
            delta_min: gaps.delta_min,
            delta_max: per_agent(&labels, &gaps.delta_max),
            delta_rho_min: gaps.delta_rho_min,
            delta_rho_max_star: gaps.delta_rho_max_star.as_ref().map(|v| per_agent(&labels, v)),
            delta_b_max_star: gaps.delta_b_max_star.as_ref().map(|v| per_agent(&labels, v)),
            rho_matching: gaps.rho_matching.as_ref().map(|m| m.dashed()),
            pricing_matching: gaps.pricing_matching.as_ref().map(|m| m.dashed()),
        }
    }
}

/// Bound values per kind; `None` when the kind does not apply.
pub type BoundsJson = BTreeMap<&'static str, Option<AgentMap<f64>>>;

pub fn bounds_json(gaps: &GapStats<f64>, sigma2: f64, alpha: f64, horizon: u64) -> CliResult<BoundsJson> {
    let labels = agent_labels(gaps.shape);
    let mut out = BTreeMap::new();
    for kind in BoundKind::ALL {
        let value = match theoretical_bound(kind, gaps, sigma2, alpha, horizon) {
            Ok(v) => Some(per_agent(&labels, &v)),
            // A missing prerequisite only means the bound does not apply.
            Err(MarketError::Parameter(_)) => None,
            Err(e) => return Err(e.into()),
        };
        out.insert(kind.name(), value);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct RegretJson {
    pub checkpoints: Vec<u64>,
    pub optimal: AgentMap<Vec<f64>>,
    pub pessimal: AgentMap<Vec<f64>>,
    pub optimal_sd: AgentMap<Vec<f64>>,
    pub pessimal_sd: AgentMap<Vec<f64>>,
    pub optimal_matching: AgentMap<String>,
    pub pessimal_matching: AgentMap<String>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Verdicts {
    pub optimal: Growth,
    pub pessimal: Growth,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub scenario: ScenarioFile,
    pub seeds: Vec<u64>,
    pub gaps: GapsJson,
    pub bounds: BoundsJson,
    pub regret: Option<RegretJson>,
    pub classifier: Option<AgentMap<Verdicts>>,
    pub welfare_min_ratio: Option<f64>,
    pub welfare_degenerate_steps: usize,
    pub unstable_steps: usize,
}

pub fn classify(report: &RegretReport<f64>) -> CliResult<Option<AgentMap<Verdicts>>> {
    if report.checkpoints.len() < 4 {
        return Ok(None);
    }
    let mut out = BTreeMap::new();
    for a in report.shape.agents() {
        out.insert(
            a.to_string(),
            Verdicts {
                optimal: growth_classifier(&report.optimal_curve(a))?,
                pessimal: growth_classifier(&report.pessimal_curve(a))?,
            },
        );
    }
    Ok(Some(out))
}

pub fn summarize(loaded: &LoadedScenario, traces: &[Trace64]) -> CliResult<Summary> {
    let s = &loaded.scenario;
    let shape = s.shape();
    let labels = agent_labels(shape);
    let gaps = GapStats::compute(&s.true_prefs, loaded.pricing.as_ref())?;
    let bounds = bounds_json(&gaps, s.sigma2, s.alpha, s.horizon.max(1))?;

    let (regret, classifier) = if loaded.checkpoints.is_empty() {
        (None, None)
    } else {
        let ex = extremal_matchings(&s.true_prefs, &s.rule, DEFAULT_ENUMERATION_BUDGET)?;
        let report = regret_curves(traces, &ex, &s.rule, &loaded.checkpoints)?;
        let json = RegretJson {
            checkpoints: report.checkpoints.clone(),
            optimal: per_agent(&labels, &report.optimal),
            pessimal: per_agent(&labels, &report.pessimal),
            optimal_sd: per_agent(&labels, &report.optimal_sd),
            pessimal_sd: per_agent(&labels, &report.pessimal_sd),
            optimal_matching: per_agent(&labels, &ex.optimal.iter().map(|m| m.dashed()).collect::<Vec<_>>()),
            pessimal_matching: per_agent(&labels, &ex.pessimal.iter().map(|m| m.dashed()).collect::<Vec<_>>()),
        };
        (Some(json), classify(&report)?)
    };

    let mut welfare_min_ratio: Option<f64> = None;
    let mut welfare_degenerate_steps = 0;
    for trace in traces {
        let series = welfare_ratio_series(trace);
        welfare_degenerate_steps += series.iter().filter(|w| w.degenerate_zero).count();
        if let Some(m) = min_welfare_ratio(&series) {
            welfare_min_ratio = Some(welfare_min_ratio.map_or(m, |w| w.min(m)));
        }
    }
    let unstable_steps = traces.iter().flat_map(|t| &t.records).filter(|r| !r.stable).count();

    Ok(Summary {
        scenario: loaded.file.clone(),
        seeds: loaded.seeds.clone(),
        gaps: GapsJson::new(&gaps),
        bounds,
        regret,
        classifier,
        welfare_min_ratio,
        welfare_degenerate_steps,
        unstable_steps,
    })
}
