use crate::agent::MarketShape;
use crate::error::{MarketError, Result};
use crate::matching::Matching;
use crate::scalar::Scalar;

/// `N x L` edge weights, row `u`, column `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix<T> {
    shape: MarketShape,
    data: Vec<T>,
}

impl<T: Scalar> WeightMatrix<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        let l = rows.first().map_or(0, Vec::len);
        let shape = MarketShape::new(n, l)?;
        if rows.iter().any(|r| r.len() != l) {
            return Err(MarketError::InvalidShape("ragged weight matrix".into()));
        }
        if rows.iter().flatten().any(|w| !w.is_finite()) {
            return Err(MarketError::Parameter("weights must be finite".into()));
        }
        Ok(WeightMatrix {
            shape,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(shape: MarketShape, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(shape.n_users * shape.n_providers);
        for u in 0..shape.n_users {
            for p in 0..shape.n_providers {
                data.push(f(u, p));
            }
        }
        WeightMatrix { shape, data }
    }

    pub fn shape(&self) -> MarketShape {
        self.shape
    }

    #[inline]
    pub fn get(&self, user: usize, provider: usize) -> T {
        self.data[user * self.shape.n_providers + provider]
    }

    /// Summed weight of the matched edges.
    pub fn total(&self, m: &Matching) -> T {
        m.pairs().map(|(u, p)| self.get(u, p)).sum()
    }
}

/// Maximum-weight feasible matching (every provider matched to a distinct
/// user) via the shortest-augmenting-path Hungarian method, `O(L^2 N)`.
pub fn max_weight_matching<T: Scalar>(weights: &WeightMatrix<T>) -> (Matching, T) {
    let shape = weights.shape();
    let (rows, cols) = (shape.n_providers, shape.n_users);
    let inf = T::infinity();
    // 1-based potentials; row = provider, column = user, cost = -weight.
    let mut row_pot = vec![T::zero(); rows + 1];
    let mut col_pot = vec![T::zero(); cols + 1];
    let mut col_owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];

    for r in 1..=rows {
        col_owner[0] = r;
        let mut j0 = 0usize;
        let mut min_v = vec![inf; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = -weights.get(j - 1, i0 - 1) - row_pot[i0] - col_pot[j];
                if cur < min_v[j] {
                    min_v[j] = cur;
                    way[j] = j0;
                }
                if min_v[j] < delta {
                    delta = min_v[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    row_pot[col_owner[j]] = row_pot[col_owner[j]] + delta;
                    col_pot[j] = col_pot[j] - delta;
                } else {
                    min_v[j] = min_v[j] - delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut provider_to_user = vec![0usize; rows];
    for j in 1..=cols {
        if col_owner[j] != 0 {
            provider_to_user[col_owner[j] - 1] = j - 1;
        }
    }
    let m = Matching::new(provider_to_user, shape).expect("assignment is a feasible matching");
    let total = weights.total(&m);
    (m, total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_prefers_the_cross() {
        let w = WeightMatrix::new(vec![vec![10.0, 9.0], vec![9.5, 0.5]]).unwrap();
        let (m, total) = max_weight_matching(&w);
        assert_eq!(m.provider_to_user(), &[1, 0]);
        assert_eq!(total, 18.5);
    }

    #[test]
    fn single_edge() {
        let w = WeightMatrix::new(vec![vec![-3.25]]).unwrap();
        assert_eq!(max_weight_matching(&w).1, -3.25);
    }

    #[test]
    fn constant_weights_give_l_times_c() {
        let w = WeightMatrix::new(vec![vec![2.5; 3]; 3]).unwrap();
        assert_eq!(max_weight_matching(&w).1, 7.5);
    }

    #[test]
    fn rectangular_picks_best_users() {
        let w = WeightMatrix::new(vec![vec![1.0], vec![5.0], vec![3.0]]).unwrap();
        let (m, total) = max_weight_matching(&w);
        assert_eq!(m.provider_to_user(), &[1]);
        assert_eq!(total, 5.0);
    }

    #[test]
    fn negative_weights_still_match_every_provider() {
        let w = WeightMatrix::new(vec![vec![-1.0, -5.0], vec![-2.0, -1.5], vec![-9.0, -9.0]]).unwrap();
        let (m, total) = max_weight_matching(&w);
        assert_eq!(m.provider_to_user(), &[0, 1]);
        assert_eq!(total, -2.5);
    }
}
