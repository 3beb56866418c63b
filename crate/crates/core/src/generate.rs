//! Random instances for experiments and property tests.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::agent::{AgentId, MarketShape};
use crate::error::{MarketError, Result};
use crate::matching::Matching;
use crate::prefs::PreferenceTable;
use crate::scalar::Scalar;
use crate::stable::WeightMatrix;

const MAX_ATTEMPTS: usize = 100_000;

/// `k` values in `[0, 1]` whose pairwise gaps, and gaps to the implicit
/// unmatched value 0, are all at least `margin`.
fn separated_row<R: Rng + ?Sized>(rng: &mut R, k: usize, margin: f64) -> Result<Vec<f64>> {
    if margin < 0.0 || (k as f64) * margin >= 1.0 {
        return Err(MarketError::Parameter(format!(
            "cannot place {k} values in [0, 1] with margin {margin}"
        )));
    }
    for _ in 0..MAX_ATTEMPTS {
        let row: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        let mut sorted = row.clone();
        sorted.push(0.0);
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).all(|w| w[1] - w[0] >= margin) {
            return Ok(row);
        }
    }
    Err(MarketError::Parameter(format!("rejection sampling failed for margin {margin}")))
}

/// Strict preferences with entries in `[margin, 1]`, each row separated by
/// at least `margin` (counting the unmatched value 0 as part of the row).
pub fn random_strict_prefs<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    shape: MarketShape,
    margin: f64,
) -> Result<PreferenceTable<T>> {
    let user_rows = (0..shape.n_users)
        .map(|_| separated_row(rng, shape.n_providers, margin).map(|r| r.into_iter().map(T::lit).collect()))
        .collect::<Result<Vec<Vec<T>>>>()?;
    let provider_rows = (0..shape.n_providers)
        .map(|_| separated_row(rng, shape.n_users, margin).map(|r| r.into_iter().map(T::lit).collect()))
        .collect::<Result<Vec<Vec<T>>>>()?;
    PreferenceTable::new(shape, user_rows, provider_rows)
}

/// Strict non-negative preferences whose symmetrization
/// `rho = (mu(a, b) + mu(b, a)) / 2` takes `N * L` distinct values separated
/// by at least `min_gap`, with every value at least `min_gap` from zero.
pub fn random_pairwise_unique_rho<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    shape: MarketShape,
    min_gap: f64,
) -> Result<PreferenceTable<T>> {
    if !(min_gap > 0.0) {
        return Err(MarketError::Parameter("min_gap must be positive".into()));
    }
    let cells = shape.n_users * shape.n_providers;
    let step = 1.25 * min_gap;
    for _ in 0..MAX_ATTEMPTS {
        let mut levels: Vec<f64> = (1..=cells)
            .map(|k| k as f64 * step + rng.random::<f64>() * (step - min_gap))
            .collect();
        levels.shuffle(rng);
        let splits: Vec<f64> = (0..cells).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        let mut user_rows = vec![vec![T::zero(); shape.n_providers]; shape.n_users];
        let mut provider_rows = vec![vec![T::zero(); shape.n_users]; shape.n_providers];
        for u in 0..shape.n_users {
            for p in 0..shape.n_providers {
                let cell = u * shape.n_providers + p;
                let rho = levels[cell];
                let delta = 0.9 * rho * splits[cell];
                user_rows[u][p] = T::lit(rho + delta);
                provider_rows[p][u] = T::lit(rho - delta);
            }
        }
        let table = PreferenceTable::new(shape, user_rows, provider_rows)?;
        if table.is_strict() {
            return Ok(table);
        }
    }
    Err(MarketError::Parameter("could not draw a strict table".into()))
}

/// Uniformly random feasible matching.
pub fn random_feasible_matching<R: Rng + ?Sized>(rng: &mut R, shape: MarketShape) -> Matching {
    let mut users: Vec<usize> = (0..shape.n_users).collect();
    users.shuffle(rng);
    users.truncate(shape.n_providers);
    Matching::new(users, shape).expect("distinct users")
}

/// Independent `U[0, 1)` edge weights.
pub fn random_weights<T: Scalar, R: Rng + ?Sized>(rng: &mut R, shape: MarketShape) -> WeightMatrix<T> {
    WeightMatrix::from_fn(shape, |_, _| T::lit(rng.random::<f64>()))
}

/// Smallest within-row gap of `table`, including the gap to the unmatched
/// value 0.
pub fn min_row_gap<T: Scalar>(table: &PreferenceTable<T>) -> T {
    let mut best = T::infinity();
    for a in table.shape().agents() {
        let mut row: Vec<T> = table.row(a).to_vec();
        row.push(T::zero());
        row.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for w in row.windows(2) {
            best = best.min(w[1] - w[0]);
        }
    }
    best
}

/// Every agent's row viewed through `f`, for quick checks in tests.
pub fn rows_of<T: Scalar>(table: &PreferenceTable<T>) -> Vec<(AgentId, Vec<T>)> {
    table.shape().agents().map(|a| (a, table.row(a).to_vec())).collect()
}
