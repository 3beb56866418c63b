use crate::agent::MarketShape;
use crate::error::{MarketError, Result};
use crate::matching::Matching;
use crate::payoff::blocking_pair;
use crate::prefs::PreferenceTable;
use crate::scalar::Scalar;

/// Candidate budget for exhaustive enumeration; `9!` fits comfortably.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000;

/// Every stable matching of one payoff table, in lexicographic order of the
/// provider-to-user arrays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableSet {
    matchings: Vec<Matching>,
}

impl StableSet {
    pub fn matchings(&self) -> &[Matching] {
        &self.matchings
    }

    pub fn len(&self) -> usize {
        self.matchings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matchings.is_empty()
    }

    pub fn contains(&self, m: &Matching) -> bool {
        self.matchings.binary_search(m).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Matching> {
        self.matchings.iter()
    }
}

impl<'a> IntoIterator for &'a StableSet {
    type Item = &'a Matching;
    type IntoIter = std::slice::Iter<'a, Matching>;

    fn into_iter(self) -> Self::IntoIter {
        self.matchings.iter()
    }
}

/// Visits every injective provider-to-user map in lexicographic order.
pub fn for_each_feasible(shape: MarketShape, mut visit: impl FnMut(&[usize])) {
    fn go(
        shape: MarketShape,
        current: &mut Vec<usize>,
        used: &mut [bool],
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if current.len() == shape.n_providers {
            visit(current);
            return;
        }
        for u in 0..shape.n_users {
            if !used[u] {
                used[u] = true;
                current.push(u);
                go(shape, current, used, visit);
                current.pop();
                used[u] = false;
            }
        }
    }
    let mut used = vec![false; shape.n_users];
    go(shape, &mut Vec::with_capacity(shape.n_providers), &mut used, &mut visit);
}

/// Brute-force stable set: all feasible matchings with no blocking pair.
pub fn enumerate_stable<T: Scalar>(payoffs: &PreferenceTable<T>, budget: u128) -> Result<StableSet> {
    let shape = payoffs.shape();
    let candidates = shape.feasible_count();
    if candidates > budget {
        return Err(MarketError::InstanceTooLarge { candidates, budget });
    }
    let mut matchings = Vec::new();
    for_each_feasible(shape, |assign| {
        let m = Matching::new(assign.to_vec(), shape).expect("enumerated maps are injective");
        if blocking_pair(&m, payoffs).expect("sizes agree").is_none() {
            matchings.push(m);
        }
    });
    // Lexicographic generation already yields canonical order without repeats.
    debug_assert!(matchings.windows(2).all(|w| w[0] < w[1]));
    Ok(StableSet { matchings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pair_has_one_stable_matching() {
        let shape = MarketShape::new(1, 1).unwrap();
        let t = PreferenceTable::new(shape, vec![vec![0.2]], vec![vec![0.4]]).unwrap();
        let set = enumerate_stable(&t, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn visits_falling_factorial_many() {
        let shape = MarketShape::new(4, 2).unwrap();
        let mut seen = Vec::new();
        for_each_feasible(shape, |a| seen.push(a.to_vec()));
        assert_eq!(seen.len(), 12);
        assert_eq!(seen[0], vec![0, 1]);
        assert_eq!(seen[11], vec![3, 2]);
    }

    #[test]
    fn budget_is_enforced() {
        let shape = MarketShape::new(11, 11).unwrap();
        let t = PreferenceTable::<f64>::zeros(shape);
        assert!(matches!(
            enumerate_stable(&t, DEFAULT_ENUMERATION_BUDGET),
            Err(MarketError::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn all_zero_payoffs_make_everything_stable() {
        let shape = MarketShape::new(3, 2).unwrap();
        let t = PreferenceTable::<f64>::zeros(shape);
        assert_eq!(enumerate_stable(&t, 100).unwrap().len(), 6);
    }
}
