use serde::Serialize;

use crate::agent::{AgentId, MarketShape};
use crate::bandit::ucb_bonus;
use crate::error::{MarketError, Result};
use crate::market::Trace;
use crate::matching::Matching;
use crate::payoff::{matched_payoff, payoff_table};
use crate::prefs::PreferenceTable;
use crate::rules::RuleRegime;
use crate::scalar::Scalar;
use crate::stable::{enumerate_stable, StableSet};

/// Expected per-step payoff of each pair under `rule` with true means.
///
/// Costs and transfers are either constants or linear in the reported
/// preferences, and the exploration bonuses cancel whenever they enter
/// symmetrically, so the expectation is the rule's payoff evaluated on `mu`.
pub fn expected_payoffs<T: Scalar>(true_prefs: &PreferenceTable<T>, rule: &RuleRegime<T>) -> Result<PreferenceTable<T>> {
    payoff_table(rule, true_prefs)
}

/// Best and worst true-stable matching for every agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Extremal<T> {
    pub rule: RuleRegime<T>,
    pub expected: PreferenceTable<T>,
    pub stable_set: StableSet,
    /// Indexed by agent slot.
    pub optimal: Vec<Matching>,
    pub pessimal: Vec<Matching>,
}

impl<T: Scalar> Extremal<T> {
    pub fn optimal_for(&self, a: AgentId) -> &Matching {
        &self.optimal[self.expected.shape().agent_slot(a)]
    }

    pub fn pessimal_for(&self, a: AgentId) -> &Matching {
        &self.pessimal[self.expected.shape().agent_slot(a)]
    }
}

/// For each agent, the member of the true stable set with the highest and
/// lowest expected payoff. Ties go to the earliest matching in canonical
/// order.
pub fn extremal_matchings<T: Scalar>(
    true_prefs: &PreferenceTable<T>,
    rule: &RuleRegime<T>,
    budget: u128,
) -> Result<Extremal<T>> {
    let expected = expected_payoffs(true_prefs, rule)?;
    let stable_set = enumerate_stable(&expected, budget)?;
    let first = stable_set
        .matchings()
        .first()
        .ok_or_else(|| MarketError::Infeasible("true stable set is empty".into()))?;
    let shape = expected.shape();
    let mut optimal = Vec::with_capacity(shape.n_agents());
    let mut pessimal = Vec::with_capacity(shape.n_agents());
    for a in shape.agents() {
        let (mut best, mut best_v) = (first, matched_payoff(&expected, first, a));
        let (mut worst, mut worst_v) = (first, best_v);
        for m in stable_set.iter().skip(1) {
            let v = matched_payoff(&expected, m, a);
            if v > best_v {
                best = m;
                best_v = v;
            }
            if v < worst_v {
                worst = m;
                worst_v = v;
            }
        }
        optimal.push(best.clone());
        pessimal.push(worst.clone());
    }
    Ok(Extremal {
        rule: rule.clone(),
        expected,
        stable_set,
        optimal,
        pessimal,
    })
}

/// Cumulative regret at each checkpoint, averaged over traces. Matrices are
/// indexed `[agent slot][checkpoint]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct RegretReport<T> {
    pub shape: MarketShape,
    pub rule: String,
    pub checkpoints: Vec<u64>,
    pub n_traces: usize,
    pub optimal: Vec<Vec<T>>,
    pub pessimal: Vec<Vec<T>>,
    /// Sample standard deviation across traces; zero for a single trace.
    pub optimal_sd: Vec<Vec<T>>,
    pub pessimal_sd: Vec<Vec<T>>,
}

impl<T: Scalar> RegretReport<T> {
    pub fn optimal_curve(&self, a: AgentId) -> Vec<(u64, T)> {
        let slot = self.shape.agent_slot(a);
        self.checkpoints.iter().copied().zip(self.optimal[slot].iter().copied()).collect()
    }

    pub fn pessimal_curve(&self, a: AgentId) -> Vec<(u64, T)> {
        let slot = self.shape.agent_slot(a);
        self.checkpoints.iter().copied().zip(self.pessimal[slot].iter().copied()).collect()
    }

    pub fn final_optimal(&self, a: AgentId) -> T {
        *self.optimal[self.shape.agent_slot(a)].last().expect("at least one checkpoint")
    }

    pub fn final_pessimal(&self, a: AgentId) -> T {
        *self.pessimal[self.shape.agent_slot(a)].last().expect("at least one checkpoint")
    }
}

fn check_checkpoints<T>(traces: &[Trace<T>], checkpoints: &[u64]) -> Result<()> {
    if traces.is_empty() {
        return Err(MarketError::InsufficientData("no traces supplied".into()));
    }
    if checkpoints.is_empty() {
        return Err(MarketError::InsufficientData("no checkpoints supplied".into()));
    }
    if checkpoints[0] < 1 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MarketError::Parameter(format!(
            "checkpoints must be strictly increasing and start at 1 or later, got {checkpoints:?}"
        )));
    }
    let last = *checkpoints.last().unwrap();
    for trace in traces {
        if (trace.records.len() as u64) < last {
            return Err(MarketError::Parameter(format!(
                "checkpoint {last} exceeds a trace of length {}",
                trace.records.len()
            )));
        }
    }
    Ok(())
}

/// Mean and sample standard deviation across per-trace curves.
fn summarize<T: Scalar>(per_trace: &[Vec<Vec<T>>]) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
    let n = per_trace.len();
    let agents = per_trace[0].len();
    let points = per_trace[0][0].len();
    let count = T::from_count(n as u64);
    let mut mean = vec![vec![T::zero(); points]; agents];
    let mut sd = vec![vec![T::zero(); points]; agents];
    for s in 0..agents {
        for k in 0..points {
            let m = per_trace.iter().map(|c| c[s][k]).sum::<T>() / count;
            mean[s][k] = m;
            if n > 1 {
                let ss: T = per_trace.iter().map(|c| (c[s][k] - m) * (c[s][k] - m)).sum();
                sd[s][k] = (ss / T::from_count(n as u64 - 1)).sqrt();
            }
        }
    }
    (mean, sd)
}

/// Cumulates `increment(slot, t, record_index)` and samples it at the
/// checkpoints.
fn cumulate<T: Scalar>(
    agents: usize,
    checkpoints: &[u64],
    mut increment: impl FnMut(usize, usize) -> T,
) -> Vec<Vec<T>> {
    let mut running = vec![T::zero(); agents];
    let mut out = vec![Vec::with_capacity(checkpoints.len()); agents];
    let mut next = 0;
    let last = *checkpoints.last().unwrap();
    for i in 0..last as usize {
        for (s, r) in running.iter_mut().enumerate() {
            *r = *r + increment(s, i);
        }
        if checkpoints[next] == i as u64 + 1 {
            for (s, r) in running.iter().enumerate() {
                out[s].push(*r);
            }
            next += 1;
        }
    }
    out
}

/// Optimal and pessimal regret with true-mean increments
/// `E[U(a, extremal(a))] - E[U(a, m_t(a))]`.
pub fn regret_curves<T: Scalar>(
    traces: &[Trace<T>],
    extremal: &Extremal<T>,
    rule: &RuleRegime<T>,
    checkpoints: &[u64],
) -> Result<RegretReport<T>> {
    if *rule != extremal.rule {
        return Err(MarketError::RuleMismatch {
            trace: extremal.rule.to_string(),
            requested: rule.to_string(),
        });
    }
    for trace in traces {
        if trace.scenario.rule != *rule {
            return Err(MarketError::RuleMismatch {
                trace: trace.scenario.rule.to_string(),
                requested: rule.to_string(),
            });
        }
    }
    check_checkpoints(traces, checkpoints)?;
    let expected = &extremal.expected;
    let shape = expected.shape();
    if traces.iter().any(|t| t.scenario.shape() != shape) {
        return Err(MarketError::InvalidShape("trace and extremal matchings disagree on shape".into()));
    }
    let agents: Vec<AgentId> = shape.agents().collect();
    let best: Vec<T> = agents
        .iter()
        .enumerate()
        .map(|(s, &a)| matched_payoff(expected, &extremal.optimal[s], a))
        .collect();
    let worst: Vec<T> = agents
        .iter()
        .enumerate()
        .map(|(s, &a)| matched_payoff(expected, &extremal.pessimal[s], a))
        .collect();

    let mut opt_runs = Vec::with_capacity(traces.len());
    let mut pess_runs = Vec::with_capacity(traces.len());
    for trace in traces {
        let got: Vec<Vec<T>> = trace
            .records
            .iter()
            .take(*checkpoints.last().unwrap() as usize)
            .map(|r| agents.iter().map(|&a| matched_payoff(expected, &r.matching, a)).collect())
            .collect();
        opt_runs.push(cumulate(agents.len(), checkpoints, |s, i| best[s] - got[i][s]));
        pess_runs.push(cumulate(agents.len(), checkpoints, |s, i| worst[s] - got[i][s]));
    }
    let (optimal, optimal_sd) = summarize(&opt_runs);
    let (pessimal, pessimal_sd) = summarize(&pess_runs);
    Ok(RegretReport {
        shape,
        rule: rule.to_string(),
        checkpoints: checkpoints.to_vec(),
        n_traces: traces.len(),
        optimal,
        pessimal,
        optimal_sd,
        pessimal_sd,
    })
}

/// Regret when the cost equals the whole reported preference (`gamma = 1`).
///
/// Then `E[U_t(a, b)] = mu(a, b) - E[nu_t(a, b)]`, which leaves minus the
/// exploration bonus, and every feasible matching is stable. The optimal
/// partner at step `t` is the counterpart with the largest expected sample
/// count `E[T_{t-1}(a, b)]` (smallest bonus), the pessimal one the smallest.
/// Expectations over rewards are estimated by the mean across traces, so all
/// traces must share one scenario apart from the seed.
pub fn transient_cost_regret<T: Scalar>(traces: &[Trace<T>], checkpoints: &[u64]) -> Result<RegretReport<T>> {
    check_checkpoints(traces, checkpoints)?;
    let scenario = &traces[0].scenario;
    let full_cost = RuleRegime::Proportional { gamma: T::one() };
    for trace in traces {
        if trace.scenario.rule != full_cost {
            return Err(MarketError::RuleMismatch {
                trace: trace.scenario.rule.to_string(),
                requested: full_cost.to_string(),
            });
        }
        let s = &trace.scenario;
        if s.shape() != scenario.shape() || s.warm_start != scenario.warm_start || s.sigma2 != scenario.sigma2 || s.alpha != scenario.alpha {
            return Err(MarketError::Parameter("traces differ in more than the seed".into()));
        }
    }
    let shape = scenario.shape();
    let agents: Vec<AgentId> = shape.agents().collect();
    let last = *checkpoints.last().unwrap() as usize;
    let (sigma2, alpha) = (scenario.sigma2, scenario.alpha);

    // counts[trace][slot][counterpart] before the current step.
    let mut counts: Vec<Vec<Vec<u64>>> = traces
        .iter()
        .map(|_| {
            agents
                .iter()
                .map(|a| vec![scenario.warm_start; shape.side_len(a.side.other())])
                .collect()
        })
        .collect();
    let n_traces = T::from_count(traces.len() as u64);
    let mut running_opt = vec![vec![T::zero(); agents.len()]; traces.len()];
    let mut running_pess = vec![vec![T::zero(); agents.len()]; traces.len()];
    let mut opt_runs = vec![vec![Vec::with_capacity(checkpoints.len()); agents.len()]; traces.len()];
    let mut pess_runs = opt_runs.clone();
    let mut next = 0;
    for i in 0..last {
        let t = i as u64 + 1;
        for (s, &a) in agents.iter().enumerate() {
            let width = shape.side_len(a.side.other());
            let mean_count = |b: usize| counts.iter().map(|c| T::from_count(c[s][b])).sum::<T>() / n_traces;
            let (mut most, mut least) = (0, 0);
            for b in 1..width {
                if mean_count(b) > mean_count(most) {
                    most = b;
                }
                if mean_count(b) < mean_count(least) {
                    least = b;
                }
            }
            for (k, trace) in traces.iter().enumerate() {
                let c = &counts[k][s];
                let bonus = |b: usize| ucb_bonus(sigma2, alpha, t, c[b]);
                let got = match trace.records[i].matching.partner(a) {
                    Some(b) => -bonus(b.index),
                    None => T::zero(),
                };
                running_opt[k][s] = running_opt[k][s] + (-bonus(most) - got);
                running_pess[k][s] = running_pess[k][s] + (-bonus(least) - got);
            }
        }
        for (k, trace) in traces.iter().enumerate() {
            for (s, &a) in agents.iter().enumerate() {
                if let Some(b) = trace.records[i].matching.partner(a) {
                    counts[k][s][b.index] += 1;
                }
            }
        }
        if checkpoints[next] == t {
            for k in 0..traces.len() {
                for s in 0..agents.len() {
                    opt_runs[k][s].push(running_opt[k][s]);
                    pess_runs[k][s].push(running_pess[k][s]);
                }
            }
            next += 1;
        }
    }
    let (optimal, optimal_sd) = summarize(&opt_runs);
    let (pessimal, pessimal_sd) = summarize(&pess_runs);
    Ok(RegretReport {
        shape,
        rule: full_cost.to_string(),
        checkpoints: checkpoints.to_vec(),
        n_traces: traces.len(),
        optimal,
        pessimal,
        optimal_sd,
        pessimal_sd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{run, Scenario};
    use crate::stable::DEFAULT_ENUMERATION_BUDGET;

    fn forced_pair() -> PreferenceTable<f64> {
        let shape = MarketShape::new(2, 2).unwrap();
        PreferenceTable::new(
            shape,
            vec![vec![0.9, 0.2], vec![0.3, 0.8]],
            vec![vec![0.7, 0.1], vec![0.2, 0.6]],
        )
        .unwrap()
    }

    #[test]
    fn unique_stable_set_makes_extremes_coincide() {
        let ex = extremal_matchings(&forced_pair(), &RuleRegime::Zero, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(ex.stable_set.len(), 1);
        assert_eq!(ex.optimal, ex.pessimal);
    }

    #[test]
    fn rule_mismatch_is_reported() {
        let prefs = forced_pair();
        let ex = extremal_matchings(&prefs, &RuleRegime::Zero, DEFAULT_ENUMERATION_BUDGET).unwrap();
        let trace = run(&Scenario::new(prefs, RuleRegime::Zero, 0.0, 3.0, 5, 1)).unwrap();
        let err = regret_curves(&[trace], &ex, &RuleRegime::Balanced, &[5]).unwrap_err();
        assert!(matches!(err, MarketError::RuleMismatch { .. }));
    }

    #[test]
    fn noiseless_run_on_the_optimum_has_zero_regret() {
        let prefs = forced_pair();
        let ex = extremal_matchings(&prefs, &RuleRegime::Zero, DEFAULT_ENUMERATION_BUDGET).unwrap();
        let trace = run(&Scenario::new(prefs, RuleRegime::Zero, 0.0, 3.0, 20, 1)).unwrap();
        let report = regret_curves(&[trace], &ex, &RuleRegime::Zero, &[1, 10, 20]).unwrap();
        assert!(report.optimal.iter().flatten().all(|&r| r == 0.0));
        assert_eq!(report.optimal, report.pessimal);
    }

    #[test]
    fn checkpoints_beyond_horizon_error() {
        let prefs = forced_pair();
        let ex = extremal_matchings(&prefs, &RuleRegime::Zero, DEFAULT_ENUMERATION_BUDGET).unwrap();
        let trace = run(&Scenario::new(prefs, RuleRegime::Zero, 0.0, 3.0, 5, 1)).unwrap();
        assert!(regret_curves(&[trace.clone()], &ex, &RuleRegime::Zero, &[6]).is_err());
        assert!(regret_curves(&[trace], &ex, &RuleRegime::Zero, &[3, 3]).is_err());
    }
}
