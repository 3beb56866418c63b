use crate::agent::{AgentId, MarketShape};
use crate::error::{MarketError, Result};
use crate::matching::{feasibility_check, Matching};
use crate::prefs::PreferenceTable;
use crate::rules::{cost, transfer, RuleRegime};
use crate::scalar::Scalar;

/// `V(a, b; psi) = psi(a, b) - C(a, b; psi) + T(a, b; psi)`; zero when `b` is
/// `None`.
pub fn payoff<T: Scalar>(
    rule: &RuleRegime<T>,
    prefs: &PreferenceTable<T>,
    a: AgentId,
    b: Option<AgentId>,
) -> Result<T> {
    let base = prefs.value(a, b)?;
    if let (RuleRegime::Balanced, Some(b)) = (rule, b) {
        // Same value as psi - C + T, written in the form that is bit-for-bit
        // symmetric in (a, b).
        return Ok((base + prefs.at(b, a.index)) * T::half());
    }
    Ok(base - cost(rule, prefs, a, b)? + transfer(rule, prefs, a, b)?)
}

/// `V(., .; psi)` evaluated on every opposite-side pair.
pub fn payoff_table<T: Scalar>(rule: &RuleRegime<T>, prefs: &PreferenceTable<T>) -> Result<PreferenceTable<T>> {
    rule.validate(prefs.shape().n_providers)?;
    Ok(PreferenceTable::from_fn(prefs.shape(), |a, b| {
        payoff(rule, prefs, a, Some(b)).expect("pair and rule already validated")
    }))
}

/// Payoff `a` receives under `m`.
pub fn matched_payoff<T: Scalar>(payoffs: &PreferenceTable<T>, m: &Matching, a: AgentId) -> T {
    match m.partner(a) {
        Some(b) => payoffs.at(a, b.index),
        None => T::zero(),
    }
}

fn check_matching(m: &Matching, shape: MarketShape) -> Result<()> {
    if m.shape() != shape {
        return Err(MarketError::Infeasible(format!(
            "matching sized for {:?}, payoffs for {:?}",
            m.shape(),
            shape
        )));
    }
    if let Some(v) = feasibility_check(m.provider_to_user(), shape).first() {
        return Err(MarketError::Infeasible(v.to_string()));
    }
    Ok(())
}

/// First `(user, provider)` pair that strictly prefers each other to their
/// partners under `m`, scanning users then providers in ascending order.
/// `None` means `m` is stable.
pub fn blocking_pair<T: Scalar>(m: &Matching, payoffs: &PreferenceTable<T>) -> Result<Option<(usize, usize)>> {
    let shape = payoffs.shape();
    check_matching(m, shape)?;
    let provider_current: Vec<T> = (0..shape.n_providers)
        .map(|p| payoffs.at(AgentId::provider(p), m.user_of(p)))
        .collect();
    for u in 0..shape.n_users {
        let user = AgentId::user(u);
        let current = matched_payoff(payoffs, m, user);
        let row = payoffs.row(user);
        for p in 0..shape.n_providers {
            if m.provider_of(u) == Some(p) {
                continue;
            }
            if row[p] > current && payoffs.at(AgentId::provider(p), u) > provider_current[p] {
                return Ok(Some((u, p)));
            }
        }
    }
    Ok(None)
}

pub fn is_stable<T: Scalar>(m: &Matching, payoffs: &PreferenceTable<T>) -> Result<bool> {
    Ok(blocking_pair(m, payoffs)?.is_none())
}
