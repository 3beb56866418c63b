//! Real-valued tables over (agent, counterpart) pairs.
//!
//! The same container holds true preferences, transient (UCB) preferences,
//! and any evaluated payoff function. The value against "no partner" is
//! implicit and always zero.

use serde::{Deserialize, Serialize};

use crate::agent::{AgentId, MarketShape, Side};
use crate::error::{MarketError, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceTable<T> {
    shape: MarketShape,
    /// `N x L`, row `u` is `psi(u, p_.)`.
    user: Vec<T>,
    /// `L x N`, row `p` is `psi(p, u_.)`.
    provider: Vec<T>,
}

impl<T: Scalar> PreferenceTable<T> {
    /// Builds a table from row-major matrices, rejecting non-finite entries.
    pub fn new(shape: MarketShape, user_rows: Vec<Vec<T>>, provider_rows: Vec<Vec<T>>) -> Result<Self> {
        let (n, l) = (shape.n_users, shape.n_providers);
        if user_rows.len() != n || user_rows.iter().any(|r| r.len() != l) {
            return Err(MarketError::InvalidShape(format!("user preferences must be {n}x{l}")));
        }
        if provider_rows.len() != l || provider_rows.iter().any(|r| r.len() != n) {
            return Err(MarketError::InvalidShape(format!("provider preferences must be {l}x{n}")));
        }
        let table = PreferenceTable {
            shape,
            user: user_rows.into_iter().flatten().collect(),
            provider: provider_rows.into_iter().flatten().collect(),
        };
        table.check_finite()?;
        Ok(table)
    }

    /// Table filled by evaluating `f(a, b)` for every opposite-side pair.
    pub fn from_fn(shape: MarketShape, mut f: impl FnMut(AgentId, AgentId) -> T) -> Self {
        let (n, l) = (shape.n_users, shape.n_providers);
        let mut user = Vec::with_capacity(n * l);
        for u in 0..n {
            for p in 0..l {
                user.push(f(AgentId::user(u), AgentId::provider(p)));
            }
        }
        let mut provider = Vec::with_capacity(n * l);
        for p in 0..l {
            for u in 0..n {
                provider.push(f(AgentId::provider(p), AgentId::user(u)));
            }
        }
        PreferenceTable {
            shape,
            user,
            provider,
        }
    }

    pub fn zeros(shape: MarketShape) -> Self {
        Self::from_fn(shape, |_, _| T::zero())
    }

    pub fn shape(&self) -> MarketShape {
        self.shape
    }

    fn check_finite(&self) -> Result<()> {
        for a in self.shape.agents() {
            if let Some(j) = self.row(a).iter().position(|x| !x.is_finite()) {
                return Err(MarketError::NonFinite(a, j));
            }
        }
        Ok(())
    }

    /// `psi(a, .)` indexed by counterpart.
    pub fn row(&self, a: AgentId) -> &[T] {
        let (n, l) = (self.shape.n_users, self.shape.n_providers);
        match a.side {
            Side::User => &self.user[a.index * l..(a.index + 1) * l],
            Side::Provider => &self.provider[a.index * n..(a.index + 1) * n],
        }
    }

    pub fn row_mut(&mut self, a: AgentId) -> &mut [T] {
        let (n, l) = (self.shape.n_users, self.shape.n_providers);
        match a.side {
            Side::User => &mut self.user[a.index * l..(a.index + 1) * l],
            Side::Provider => &mut self.provider[a.index * n..(a.index + 1) * n],
        }
    }

    fn check_pair(&self, a: AgentId, b: AgentId) -> Result<()> {
        if a.side == b.side {
            return Err(MarketError::InvalidPair(a, b));
        }
        self.shape.check(a)?;
        self.shape.check(b)
    }

    /// `psi(a, b)` for an opposite-side pair.
    pub fn get(&self, a: AgentId, b: AgentId) -> Result<T> {
        self.check_pair(a, b)?;
        Ok(self.row(a)[b.index])
    }

    /// `psi(a, b)`, with `psi(a, none) = 0`.
    pub fn value(&self, a: AgentId, b: Option<AgentId>) -> Result<T> {
        match b {
            None => {
                self.shape.check(a)?;
                Ok(T::zero())
            }
            Some(b) => self.get(a, b),
        }
    }

    /// Unchecked lookup for hot loops where the pair is known valid.
    #[inline]
    pub(crate) fn at(&self, a: AgentId, b_index: usize) -> T {
        self.row(a)[b_index]
    }

    pub fn set(&mut self, a: AgentId, b: AgentId, value: T) -> Result<()> {
        self.check_pair(a, b)?;
        self.row_mut(a)[b.index] = value;
        Ok(())
    }

    pub fn map(&self, mut f: impl FnMut(AgentId, AgentId, T) -> T) -> Self {
        Self::from_fn(self.shape, |a, b| f(a, b, self.at(a, b.index)))
    }

    /// First tie found in `a`'s row, as `(first, second)` counterpart indices.
    pub fn row_tie(&self, a: AgentId) -> Option<(usize, usize)> {
        let row = self.row(a);
        for i in 0..row.len() {
            for j in i + 1..row.len() {
                if row[i] == row[j] {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Rejects any table with a tie in some row.
    pub fn check_strict(&self) -> Result<()> {
        for a in self.shape.agents() {
            if let Some((first, second)) = self.row_tie(a) {
                return Err(MarketError::Ties {
                    agent: a,
                    first,
                    second,
                });
            }
        }
        Ok(())
    }

    pub fn is_strict(&self) -> bool {
        self.check_strict().is_ok()
    }

    /// Ordinal rank of `b` in `a`'s row: 1 plus the number of strictly
    /// preferred counterparts.
    pub fn rank(&self, a: AgentId, b: AgentId) -> Result<usize> {
        let target = self.get(a, b)?;
        if let Some((first, second)) = self.row_tie(a) {
            return Err(MarketError::Ties {
                agent: a,
                first,
                second,
            });
        }
        Ok(1 + self.row(a).iter().filter(|&&x| x > target).count())
    }

    /// Counterpart indices of `a`'s row sorted by decreasing value.
    pub fn ordering(&self, a: AgentId) -> Vec<usize> {
        let row = self.row(a);
        let mut idx: Vec<usize> = (0..row.len()).collect();
        idx.sort_by(|&i, &j| row[j].partial_cmp(&row[i]).expect("finite entries"));
        idx
    }

    /// `rho(a, b) = (psi(a, b) + psi(b, a)) / 2`.
    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.shape, |a, b| {
            (self.at(a, b.index) + self.at(b, a.index)) * T::half()
        })
    }

    /// Largest absolute entry over user rows.
    pub fn user_abs_bound(&self) -> T {
        self.user.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Element-wise conversion to another scalar type.
    pub fn cast<S: Scalar>(&self) -> PreferenceTable<S> {
        PreferenceTable {
            shape: self.shape,
            user: self.user.iter().map(|x| S::lit(x.to_f64_lossy())).collect(),
            provider: self.provider.iter().map(|x| S::lit(x.to_f64_lossy())).collect(),
        }
    }

    pub fn user_rows(&self) -> Vec<Vec<T>> {
        (0..self.shape.n_users).map(|u| self.row(AgentId::user(u)).to_vec()).collect()
    }

    pub fn provider_rows(&self) -> Vec<Vec<T>> {
        (0..self.shape.n_providers)
            .map(|p| self.row(AgentId::provider(p)).to_vec())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_row(row: Vec<f64>) -> PreferenceTable<f64> {
        let shape = MarketShape::new(row.len(), 1).unwrap();
        let users = vec![vec![0.0]; row.len()];
        PreferenceTable::new(shape, users, vec![row]).unwrap()
    }

    #[test]
    fn rank_counts_strictly_larger_entries() {
        let t = one_row(vec![0.9, 0.1, 0.5]);
        let p = AgentId::provider(0);
        assert_eq!(t.rank(p, AgentId::user(0)).unwrap(), 1);
        assert_eq!(t.rank(p, AgentId::user(1)).unwrap(), 3);
        assert_eq!(t.rank(p, AgentId::user(2)).unwrap(), 2);
    }

    #[test]
    fn rank_rejects_ties() {
        let t = one_row(vec![0.4, 0.4, 0.5]);
        let err = t.rank(AgentId::provider(0), AgentId::user(2)).unwrap_err();
        assert!(matches!(err, MarketError::Ties { first: 0, second: 1, .. }));
    }

    #[test]
    fn same_side_lookup_is_an_error() {
        let t = one_row(vec![0.9, 0.1]);
        assert!(matches!(
            t.get(AgentId::user(0), AgentId::user(1)),
            Err(MarketError::InvalidPair(..))
        ));
        assert_eq!(t.value(AgentId::user(1), None).unwrap(), 0.0);
    }

    #[test]
    fn non_finite_rejected() {
        let shape = MarketShape::new(1, 1).unwrap();
        assert!(PreferenceTable::new(shape, vec![vec![f64::NAN]], vec![vec![0.0]]).is_err());
        assert!(PreferenceTable::new(shape, vec![vec![1.0, 2.0]], vec![vec![0.0]]).is_err());
    }

    #[test]
    fn ordering_is_descending() {
        let t = one_row(vec![0.2, 0.9, 0.5]);
        assert_eq!(t.ordering(AgentId::provider(0)), vec![1, 2, 0]);
    }
}
