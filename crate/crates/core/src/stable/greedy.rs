use crate::agent::AgentId;
use crate::error::{MarketError, Result};
use crate::matching::Matching;
use crate::prefs::PreferenceTable;
use crate::scalar::Scalar;

use super::assignment::WeightMatrix;

/// Edge weights `w(u, p) = psi(u, p) + psi(p, u)`.
pub fn balanced_weights<T: Scalar>(prefs: &PreferenceTable<T>) -> WeightMatrix<T> {
    WeightMatrix::from_fn(prefs.shape(), |u, p| {
        prefs.at(AgentId::user(u), p) + prefs.at(AgentId::provider(p), u)
    })
}

/// Sorted-edge sweep: take edges by decreasing weight, keep each one that
/// touches no already-matched agent, stop once every provider is matched.
/// Weights must be pairwise distinct.
pub fn greedy_matching<T: Scalar>(weights: &WeightMatrix<T>) -> Result<Matching> {
    let shape = weights.shape();
    let mut edges: Vec<(T, usize, usize)> = (0..shape.n_users)
        .flat_map(|u| (0..shape.n_providers).map(move |p| (u, p)))
        .map(|(u, p)| (weights.get(u, p), u, p))
        .collect();
    edges.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite weights"));
    if let Some(w) = edges.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(MarketError::NotPairwiseUnique(w[0].1, w[0].2, w[1].1, w[1].2));
    }

    let mut user_taken = vec![false; shape.n_users];
    let mut provider_to_user: Vec<Option<usize>> = vec![None; shape.n_providers];
    let mut remaining = shape.n_providers;
    for (_, u, p) in edges {
        if remaining == 0 {
            break;
        }
        if !user_taken[u] && provider_to_user[p].is_none() {
            user_taken[u] = true;
            provider_to_user[p] = Some(u);
            remaining -= 1;
        }
    }
    let provider_to_user = provider_to_user
        .into_iter()
        .map(|u| u.expect("N >= L edges always complete the sweep"))
        .collect();
    Matching::new(provider_to_user, shape)
}

/// Stable matching under balanced transfers, found by the greedy sweep over
/// `psi(u, p) + psi(p, u)`.
pub fn greedy_balanced<T: Scalar>(prefs: &PreferenceTable<T>) -> Result<Matching> {
    greedy_matching(&balanced_weights(prefs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::MarketShape;

    #[test]
    fn sweep_takes_heaviest_compatible_edges() {
        let w = WeightMatrix::new(vec![vec![10.0, 8.0], vec![7.0, 3.0]]).unwrap();
        let m = greedy_matching(&w).unwrap();
        assert_eq!(m.provider_to_user(), &[0, 1]);
        assert_eq!(w.total(&m), 13.0);
    }

    #[test]
    fn sweep_can_lose_to_the_optimum_by_at_most_half() {
        let w = WeightMatrix::new(vec![vec![10.0, 9.0], vec![9.5, 0.5]]).unwrap();
        let m = greedy_matching(&w).unwrap();
        assert_eq!(m.provider_to_user(), &[0, 1]);
        assert_eq!(w.total(&m), 10.5);
        assert!(w.total(&m) >= 0.5 * 18.5);
    }

    #[test]
    fn single_pair() {
        let shape = MarketShape::new(1, 1).unwrap();
        let t = PreferenceTable::new(shape, vec![vec![0.3]], vec![vec![0.4]]).unwrap();
        assert_eq!(greedy_balanced(&t).unwrap().provider_to_user(), &[0]);
    }

    #[test]
    fn duplicate_weights_rejected() {
        let w = WeightMatrix::new(vec![vec![1.0, 2.0], vec![2.0, 0.5]]).unwrap();
        assert!(matches!(greedy_matching(&w), Err(MarketError::NotPairwiseUnique(..))));
    }
}
