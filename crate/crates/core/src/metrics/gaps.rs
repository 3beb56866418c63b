use serde::Serialize;

use crate::agent::{AgentId, MarketShape};
use crate::error::Result;
use crate::matching::Matching;
use crate::payoff::payoff_table;
use crate::prefs::PreferenceTable;
use crate::rules::PricingParams;
use crate::scalar::Scalar;
use crate::stable::unique_stable;

/// Preference gaps of one instance. Per-agent vectors are indexed by agent
/// slot: users first, then providers. Every row is taken together with the
/// unmatched value 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct GapStats<T> {
    pub shape: MarketShape,
    pub delta_min: T,
    pub delta_max: Vec<T>,
    pub rho: PreferenceTable<T>,
    pub delta_rho_min: T,
    /// The unique stable matching under `rho`, when there is one.
    pub rho_matching: Option<Matching>,
    pub delta_rho_max_star: Option<Vec<T>>,
    /// The unique stable matching under the supplied prices.
    pub pricing_matching: Option<Matching>,
    pub delta_b_max_star: Option<Vec<T>>,
}

fn row_with_none<T: Scalar>(table: &PreferenceTable<T>, a: AgentId) -> Vec<T> {
    let mut row = table.row(a).to_vec();
    row.push(T::zero());
    row
}

fn min_separation<T: Scalar>(row: &[T]) -> T {
    let mut sorted = row.to_vec();
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    sorted.windows(2).map(|w| w[1] - w[0]).fold(T::infinity(), T::min)
}

fn spread<T: Scalar>(row: &[T]) -> T {
    let hi = row.iter().copied().fold(T::neg_infinity(), T::max);
    let lo = row.iter().copied().fold(T::infinity(), T::min);
    hi - lo
}

/// `max over b in A+ of (psi(a, m(a)) - psi(a, b))`.
fn shortfall<T: Scalar>(table: &PreferenceTable<T>, m: &Matching, a: AgentId) -> T {
    let here = m.partner(a).map_or(T::zero(), |b| table.row(a)[b.index]);
    let lowest = row_with_none(table, a).into_iter().fold(T::infinity(), T::min);
    here - lowest
}

impl<T: Scalar> GapStats<T> {
    pub fn compute(mu: &PreferenceTable<T>, pricing: Option<&PricingParams<T>>) -> Result<Self> {
        let shape = mu.shape();
        let rho = mu.symmetrized();
        let mut delta_min = T::infinity();
        let mut delta_rho_min = T::infinity();
        let mut delta_max = Vec::with_capacity(shape.n_agents());
        for a in shape.agents() {
            let row = row_with_none(mu, a);
            delta_min = delta_min.min(min_separation(&row));
            delta_max.push(spread(&row));
            delta_rho_min = delta_rho_min.min(min_separation(&row_with_none(&rho, a)));
        }

        let rho_matching = if rho.is_strict() { unique_stable(&rho)? } else { None };
        let delta_rho_max_star = rho_matching
            .as_ref()
            .map(|m| shape.agents().map(|a| shortfall(&rho, m, a)).collect());

        let (pricing_matching, delta_b_max_star) = match pricing {
            None => (None, None),
            Some(params) => {
                params.check_bound(mu)?;
                let v = payoff_table(&params.rule(), mu)?;
                let m = if v.is_strict() { unique_stable(&v)? } else { None };
                let l_minus_one = T::from_count(shape.n_providers as u64 - 1);
                let user_extra = T::two() * params.bound * l_minus_one;
                let star = m.as_ref().map(|m| {
                    shape
                        .agents()
                        .map(|a| {
                            let extra = if a.is_user() { user_extra } else { T::zero() };
                            extra + shortfall(mu, m, a)
                        })
                        .collect()
                });
                (m, star)
            }
        };

        Ok(GapStats {
            shape,
            delta_min,
            delta_max,
            rho,
            delta_rho_min,
            rho_matching,
            delta_rho_max_star,
            pricing_matching,
            delta_b_max_star,
        })
    }

    pub fn delta_max_of(&self, a: AgentId) -> T {
        self.delta_max[self.shape.agent_slot(a)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::pricing_defaults_natural;

    fn table() -> PreferenceTable<f64> {
        let shape = MarketShape::new(2, 2).unwrap();
        PreferenceTable::new(
            shape,
            vec![vec![0.9, 0.5], vec![0.4, 0.8]],
            vec![vec![0.7, 0.3], vec![0.2, 0.6]],
        )
        .unwrap()
    }

    #[test]
    fn gaps_include_the_unmatched_value() {
        let g = GapStats::compute(&table(), None).unwrap();
        // Smallest separation: 0.2 vs 0 in provider 1's row is 0.2; 0.3 vs 0.2
        // is not in one row. Row u0 has 0.9, 0.5, 0 so gaps 0.4 and 0.5.
        assert!((g.delta_min - 0.2).abs() < 1e-12);
        assert!((g.delta_max_of(AgentId::user(0)) - 0.9).abs() < 1e-12);
        assert_eq!(g.rho.row(AgentId::user(0))[1], g.rho.row(AgentId::provider(1))[0]);
    }

    #[test]
    fn rho_star_uses_the_unique_rho_matching() {
        // rho: (u0,p0)=0.8, (u0,p1)=0.35, (u1,p0)=0.35, (u1,p1)=0.7.
        let g = GapStats::compute(&table(), None).unwrap();
        let m = g.rho_matching.clone().unwrap();
        assert_eq!(m.provider_to_user(), &[0, 1]);
        let star = g.delta_rho_max_star.unwrap();
        // u0 holds 0.8; its worst option is being unmatched.
        assert!((star[0] - 0.8).abs() < 1e-12);
        assert!((g.delta_rho_min - 0.35).abs() < 1e-12);
    }

    #[test]
    fn pricing_star_adds_the_price_span_for_users() {
        let t = table();
        let params = pricing_defaults_natural(1.0, 2).unwrap();
        let g = GapStats::compute(&t, Some(&params)).unwrap();
        let m = g.pricing_matching.unwrap();
        let star = g.delta_b_max_star.unwrap();
        let u0 = AgentId::user(0);
        let here = m.partner(u0).map_or(0.0, |b| t.row(u0)[b.index]);
        assert!((star[0] - (2.0 + here)).abs() < 1e-12);
    }
}
