//! Cost and transfer regimes.
//!
//! Every regime is a pair `(C, T)` evaluated on some preference table `psi`.
//! Transfers are antisymmetric, `T(a, b) = -T(b, a)`, and both terms vanish
//! against "no partner".

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::agent::{AgentId, Side};
use crate::error::{MarketError, Result};
use crate::prefs::PreferenceTable;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub enum RuleRegime<T> {
    /// No cost, no transfer.
    Zero,
    /// Cost `gamma * psi(a, b)`, no transfer.
    Proportional { gamma: T },
    /// No cost, transfer `(psi(b, a) - psi(a, b)) / 2`.
    Balanced,
    /// Providers pay `c1`, users pay `c2`; each user pays `g[p]` to provider `p`.
    Pricing { c1: T, c2: T, g: Vec<T> },
}

impl<T: Scalar> RuleRegime<T> {
    pub fn name(&self) -> &'static str {
        match self {
            RuleRegime::Zero => "zero",
            RuleRegime::Proportional { .. } => "proportional",
            RuleRegime::Balanced => "balanced",
            RuleRegime::Pricing { .. } => "pricing",
        }
    }

    pub fn validate(&self, n_providers: usize) -> Result<()> {
        match self {
            RuleRegime::Proportional { gamma } => {
                if !(*gamma >= T::zero() && *gamma <= T::one()) {
                    return Err(MarketError::Parameter(format!(
                        "proportional gamma must lie in [0, 1], got {gamma}"
                    )));
                }
            }
            RuleRegime::Pricing { c1, c2, g } => {
                if g.len() != n_providers {
                    return Err(MarketError::Parameter(format!(
                        "pricing needs one price per provider: {} given, {n_providers} providers",
                        g.len()
                    )));
                }
                if !c1.is_finite() || !c2.is_finite() || g.iter().any(|x| !x.is_finite()) {
                    return Err(MarketError::Parameter("pricing constants must be finite".into()));
                }
            }
            RuleRegime::Zero | RuleRegime::Balanced => {}
        }
        Ok(())
    }

    /// Payoffs under this regime are a positive multiple of the raw
    /// preferences; used by regret accounting.
    pub fn payoff_scale(&self) -> Option<T> {
        match self {
            RuleRegime::Zero => Some(T::one()),
            RuleRegime::Proportional { gamma } => Some(T::one() - *gamma),
            _ => None,
        }
    }
}

impl<T: Scalar> fmt::Display for RuleRegime<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleRegime::Proportional { gamma } => write!(f, "proportional(gamma={gamma})"),
            RuleRegime::Pricing { c1, c2, g } => {
                write!(f, "pricing(c1={c1}, c2={c2}, g={g:?})")
            }
            other => f.write_str(other.name()),
        }
    }
}

fn check_pair<T: Scalar>(prefs: &PreferenceTable<T>, a: AgentId, b: Option<AgentId>) -> Result<()> {
    prefs.shape().check(a)?;
    if let Some(b) = b {
        if a.side == b.side {
            return Err(MarketError::InvalidPair(a, b));
        }
        prefs.shape().check(b)?;
    }
    Ok(())
}

/// `C(a, b; psi)`.
pub fn cost<T: Scalar>(
    rule: &RuleRegime<T>,
    prefs: &PreferenceTable<T>,
    a: AgentId,
    b: Option<AgentId>,
) -> Result<T> {
    check_pair(prefs, a, b)?;
    let Some(b) = b else { return Ok(T::zero()) };
    Ok(match rule {
        RuleRegime::Zero | RuleRegime::Balanced => T::zero(),
        RuleRegime::Proportional { gamma } => *gamma * prefs.at(a, b.index),
        RuleRegime::Pricing { c1, c2, .. } => match a.side {
            Side::Provider => *c1,
            Side::User => *c2,
        },
    })
}

/// `T(a, b; psi)`, the amount `a` receives from `b`.
pub fn transfer<T: Scalar>(
    rule: &RuleRegime<T>,
    prefs: &PreferenceTable<T>,
    a: AgentId,
    b: Option<AgentId>,
) -> Result<T> {
    check_pair(prefs, a, b)?;
    let Some(b) = b else { return Ok(T::zero()) };
    Ok(match rule {
        RuleRegime::Zero | RuleRegime::Proportional { .. } => T::zero(),
        RuleRegime::Balanced => (prefs.at(b, a.index) - prefs.at(a, b.index)) * T::half(),
        RuleRegime::Pricing { g, .. } => match a.side {
            Side::Provider => g[a.index],
            Side::User => -g[b.index],
        },
    })
}

/// Parameters of the uniqueness-forcing price schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct PricingParams<T> {
    /// Bound `B` on `|mu(u, .)|` over every user row.
    pub bound: T,
    pub c1: T,
    pub c2: T,
    /// Price per provider index.
    pub g: Vec<T>,
}

impl<T: Scalar> PricingParams<T> {
    pub fn rule(&self) -> RuleRegime<T> {
        RuleRegime::Pricing {
            c1: self.c1,
            c2: self.c2,
            g: self.g.clone(),
        }
    }

    /// Errors when some user row of `prefs` exceeds the bound.
    pub fn check_bound(&self, prefs: &PreferenceTable<T>) -> Result<()> {
        let observed = prefs.user_abs_bound();
        if observed > self.bound {
            return Err(MarketError::Parameter(format!(
                "pricing bound B = {} is below max |mu(u, .)| = {observed}",
                self.bound
            )));
        }
        Ok(())
    }
}

/// `c1 = 0`, `c2 = 2B(1 - L)` and `g(p_k) = 2B(L - k)`, where `k` is the
/// 1-based position of the provider in `ordering`. Under these prices every
/// user ranks providers in reverse `ordering`, whatever the true preferences.
pub fn pricing_defaults<T: Scalar>(bound: T, n_providers: usize, ordering: &[usize]) -> Result<PricingParams<T>> {
    if !(bound > T::zero()) || !bound.is_finite() {
        return Err(MarketError::Parameter(format!("pricing bound must be positive, got {bound}")));
    }
    let mut seen = vec![false; n_providers];
    if ordering.len() != n_providers || ordering.iter().any(|&p| p >= n_providers || std::mem::replace(&mut seen[p], true)) {
        return Err(MarketError::Parameter(format!(
            "provider ordering {ordering:?} is not a permutation of 0..{n_providers}"
        )));
    }
    let two_b = T::two() * bound;
    let l = T::from_count(n_providers as u64);
    let mut g = vec![T::zero(); n_providers];
    for (pos, &p) in ordering.iter().enumerate() {
        let k = T::from_count(pos as u64 + 1);
        g[p] = two_b * (l - k);
    }
    Ok(PricingParams {
        bound,
        c1: T::zero(),
        c2: two_b * (T::one() - l),
        g,
    })
}

/// [`pricing_defaults`] under the natural provider order.
pub fn pricing_defaults_natural<T: Scalar>(bound: T, n_providers: usize) -> Result<PricingParams<T>> {
    let ordering: Vec<usize> = (0..n_providers).collect();
    pricing_defaults(bound, n_providers, &ordering)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::MarketShape;

    fn pair_table(up: f64, pu: f64) -> PreferenceTable<f64> {
        let shape = MarketShape::new(1, 1).unwrap();
        PreferenceTable::new(shape, vec![vec![up]], vec![vec![pu]]).unwrap()
    }

    const U: AgentId = AgentId::user(0);
    const P: AgentId = AgentId::provider(0);

    #[test]
    fn proportional_cost_scales_preference() {
        let t = pair_table(0.6, 0.1);
        let rule = RuleRegime::Proportional { gamma: 0.5 };
        assert!((cost(&rule, &t, U, Some(P)).unwrap() - 0.3).abs() < 1e-15);
        let full = RuleRegime::Proportional { gamma: 1.0 };
        assert_eq!(cost(&full, &t, U, Some(P)).unwrap(), 0.6);
    }

    #[test]
    fn balanced_transfer_splits_the_difference() {
        let t = pair_table(0.8, 0.2);
        let rule = RuleRegime::Balanced;
        let to_user = transfer(&rule, &t, U, Some(P)).unwrap();
        let to_provider = transfer(&rule, &t, P, Some(U)).unwrap();
        assert!((to_user + 0.3).abs() < 1e-15);
        assert!((to_provider - 0.3).abs() < 1e-15);
        assert_eq!(to_user + to_provider, 0.0);
    }

    #[test]
    fn pricing_costs_and_prices() {
        let t = pair_table(0.5, 0.5);
        let rule = RuleRegime::Pricing { c1: 0.0, c2: -4.0, g: vec![2.0] };
        assert_eq!(cost(&rule, &t, U, Some(P)).unwrap(), -4.0);
        assert_eq!(cost(&rule, &t, P, Some(U)).unwrap(), 0.0);
        assert_eq!(transfer(&rule, &t, P, Some(U)).unwrap(), 2.0);
        assert_eq!(transfer(&rule, &t, U, Some(P)).unwrap(), -2.0);
    }

    #[test]
    fn unmatched_is_free() {
        let t = pair_table(0.8, 0.2);
        for rule in [
            RuleRegime::Zero,
            RuleRegime::Proportional { gamma: 0.4 },
            RuleRegime::Balanced,
            RuleRegime::Pricing { c1: 1.0, c2: -3.0, g: vec![5.0] },
        ] {
            assert_eq!(cost(&rule, &t, U, None).unwrap(), 0.0);
            assert_eq!(transfer(&rule, &t, U, None).unwrap(), 0.0);
        }
    }

    #[test]
    fn same_side_is_rejected() {
        let shape = MarketShape::new(2, 1).unwrap();
        let t = PreferenceTable::<f64>::zeros(shape);
        let err = cost(&RuleRegime::Zero, &t, U, Some(AgentId::user(1))).unwrap_err();
        assert!(matches!(err, MarketError::InvalidPair(..)));
        assert!(transfer(&RuleRegime::Balanced, &t, P, Some(P)).is_err());
    }

    #[test]
    fn defaults_for_three_providers() {
        let params = pricing_defaults_natural(1.0f64, 3).unwrap();
        assert_eq!(params.c1, 0.0);
        assert_eq!(params.c2, -4.0);
        assert_eq!(params.g, vec![4.0, 2.0, 0.0]);
    }

    #[test]
    fn defaults_degenerate_with_one_provider() {
        let params = pricing_defaults_natural(1.0f64, 1).unwrap();
        assert_eq!((params.c1, params.c2, params.g.clone()), (0.0, 0.0, vec![0.0]));
    }

    #[test]
    fn defaults_follow_custom_ordering() {
        let params = pricing_defaults(0.5f64, 3, &[2, 0, 1]).unwrap();
        // positions: p2 -> k=1, p0 -> k=2, p1 -> k=3
        assert_eq!(params.g, vec![1.0, 0.0, 2.0]);
        assert!(pricing_defaults(0.5f64, 3, &[0, 0, 1]).is_err());
        assert!(pricing_defaults(0.0f64, 3, &[0, 1, 2]).is_err());
    }

    #[test]
    fn gamma_out_of_range() {
        assert!(RuleRegime::Proportional { gamma: 1.5f64 }.validate(2).is_err());
        assert!(RuleRegime::Pricing { c1: 0.0f64, c2: 0.0, g: vec![1.0] }.validate(2).is_err());
    }
}
