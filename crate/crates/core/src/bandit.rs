//! Per-agent UCB learners.
//!
//! Each directed pair `(a, b)` keeps a sample count `T(a, b)` and a running
//! reward total. The transient preference reported at step `t` is
//!
//! ```text
//! nu_t(a, b) = mean(a, b) + sqrt(2 sigma2 alpha ln(t) / T_{t-1}(a, b))
//! ```
//!
//! with the natural logarithm and `nu_t(a, none) = 0`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{AgentId, MarketShape, Side};
use crate::error::{MarketError, Result};
use crate::prefs::PreferenceTable;
use crate::reward::RewardDist;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct LearnerState<T> {
    shape: MarketShape,
    sigma2: T,
    alpha: T,
    warm_start: u64,
    /// `N x L`: users' samples of providers.
    user_counts: Vec<u64>,
    user_sums: Vec<T>,
    /// `L x N`: providers' samples of users.
    provider_counts: Vec<u64>,
    provider_sums: Vec<T>,
}

fn check_params<T: Scalar>(sigma2: T, alpha: T) -> Result<()> {
    if !(alpha > T::two()) || !alpha.is_finite() {
        return Err(MarketError::Parameter(format!("UCB alpha must exceed 2, got {alpha}")));
    }
    if !(sigma2 >= T::zero()) || !sigma2.is_finite() {
        return Err(MarketError::Parameter(format!("sigma2 must be non-negative, got {sigma2}")));
    }
    Ok(())
}

impl<T: Scalar> LearnerState<T> {
    /// Learners with no samples at all. Useful for tests; the market always
    /// starts from [`LearnerState::init_warm_start`].
    pub fn empty(shape: MarketShape, sigma2: T, alpha: T) -> Result<Self> {
        check_params(sigma2, alpha)?;
        let cells = shape.n_users * shape.n_providers;
        Ok(LearnerState {
            shape,
            sigma2,
            alpha,
            warm_start: 0,
            user_counts: vec![0; cells],
            user_sums: vec![T::zero(); cells],
            provider_counts: vec![0; cells],
            provider_sums: vec![T::zero(); cells],
        })
    }

    /// Every directed pair starts with `warm_start` draws from
    /// `D(a, b) = dist(true_means(a, b), sigma2)`. Draw order: user rows
    /// (user-major, provider-minor), then provider rows (provider-major,
    /// user-minor), `warm_start` draws per cell.
    pub fn init_warm_start<R: Rng + ?Sized>(
        shape: MarketShape,
        sigma2: T,
        alpha: T,
        warm_start: u64,
        true_means: &PreferenceTable<T>,
        dist: RewardDist,
        rng: &mut R,
    ) -> Result<Self> {
        if warm_start < 1 {
            return Err(MarketError::Parameter("warm start needs at least one sample per pair".into()));
        }
        if true_means.shape() != shape {
            return Err(MarketError::InvalidShape("true means do not match the market shape".into()));
        }
        let mut state = Self::empty(shape, sigma2, alpha)?;
        state.warm_start = warm_start;
        for a in shape.agents() {
            for b in 0..shape.side_len(a.side.other()) {
                let mean = true_means.at(a, b);
                let mut total = T::zero();
                for _ in 0..warm_start {
                    total = total + dist.sample(mean, sigma2, rng);
                }
                let cell = state.cell(a, b);
                match a.side {
                    Side::User => {
                        state.user_counts[cell] = warm_start;
                        state.user_sums[cell] = total;
                    }
                    Side::Provider => {
                        state.provider_counts[cell] = warm_start;
                        state.provider_sums[cell] = total;
                    }
                }
            }
        }
        Ok(state)
    }

    pub fn shape(&self) -> MarketShape {
        self.shape
    }

    pub fn sigma2(&self) -> T {
        self.sigma2
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn warm_start(&self) -> u64 {
        self.warm_start
    }

    fn cell(&self, a: AgentId, b_index: usize) -> usize {
        match a.side {
            Side::User => a.index * self.shape.n_providers + b_index,
            Side::Provider => a.index * self.shape.n_users + b_index,
        }
    }

    fn check_pair(&self, a: AgentId, b: AgentId) -> Result<()> {
        if a.side == b.side {
            return Err(MarketError::InvalidPair(a, b));
        }
        self.shape.check(a)?;
        self.shape.check(b)
    }

    fn count_at(&self, a: AgentId, b_index: usize) -> u64 {
        let cell = self.cell(a, b_index);
        match a.side {
            Side::User => self.user_counts[cell],
            Side::Provider => self.provider_counts[cell],
        }
    }

    fn sum_at(&self, a: AgentId, b_index: usize) -> T {
        let cell = self.cell(a, b_index);
        match a.side {
            Side::User => self.user_sums[cell],
            Side::Provider => self.provider_sums[cell],
        }
    }

    /// `T(a, b)`: samples `a` holds of `b`, warm start included.
    pub fn count(&self, a: AgentId, b: AgentId) -> Result<u64> {
        self.check_pair(a, b)?;
        Ok(self.count_at(a, b.index))
    }

    pub fn sum(&self, a: AgentId, b: AgentId) -> Result<T> {
        self.check_pair(a, b)?;
        Ok(self.sum_at(a, b.index))
    }

    /// Empirical mean `sum / count`.
    pub fn mean(&self, a: AgentId, b: AgentId) -> Result<T> {
        let n = self.count(a, b)?;
        if n == 0 {
            return Err(MarketError::MissingWarmStart(a, b));
        }
        Ok(self.sum_at(a, b.index) / T::from_count(n))
    }

    /// Records one reward `x` that `a` received from `b`.
    pub fn observe(&mut self, a: AgentId, b: AgentId, x: T) -> Result<()> {
        self.check_pair(a, b)?;
        let cell = self.cell(a, b.index);
        match a.side {
            Side::User => {
                self.user_counts[cell] += 1;
                self.user_sums[cell] = self.user_sums[cell] + x;
            }
            Side::Provider => {
                self.provider_counts[cell] += 1;
                self.provider_sums[cell] = self.provider_sums[cell] + x;
            }
        }
        Ok(())
    }

    /// Exploration bonus `sqrt(2 sigma2 alpha ln(t) / count)`.
    pub fn bonus(&self, a: AgentId, b: AgentId, t: u64) -> Result<T> {
        if t < 1 {
            return Err(MarketError::Parameter("time steps start at 1".into()));
        }
        let n = self.count(a, b)?;
        if n == 0 {
            return Err(MarketError::MissingWarmStart(a, b));
        }
        Ok(ucb_bonus(self.sigma2, self.alpha, t, n))
    }

    /// `nu_t(a, b)`; zero against no partner.
    pub fn ucb_index(&self, a: AgentId, b: Option<AgentId>, t: u64) -> Result<T> {
        let Some(b) = b else {
            self.shape.check(a)?;
            return Ok(T::zero());
        };
        let bonus = self.bonus(a, b, t)?;
        Ok(self.mean(a, b)? + bonus)
    }

    /// The whole reported table `nu_t`.
    pub fn transient(&self, t: u64) -> Result<PreferenceTable<T>> {
        if t < 1 {
            return Err(MarketError::Parameter("time steps start at 1".into()));
        }
        let shape = self.shape;
        for a in shape.agents() {
            for b in 0..shape.side_len(a.side.other()) {
                if self.count_at(a, b) == 0 {
                    let b = AgentId {
                        side: a.side.other(),
                        index: b,
                    };
                    return Err(MarketError::MissingWarmStart(a, b));
                }
            }
        }
        Ok(PreferenceTable::from_fn(shape, |a, b| {
            let n = self.count_at(a, b.index);
            self.sum_at(a, b.index) / T::from_count(n) + ucb_bonus(self.sigma2, self.alpha, t, n)
        }))
    }

    /// Sum of all directed counts.
    pub fn total_count(&self) -> u64 {
        self.user_counts.iter().chain(&self.provider_counts).sum()
    }

    /// `T(u, p) == T(p, u)` for every pair.
    pub fn counts_symmetric(&self) -> bool {
        (0..self.shape.n_users).all(|u| {
            (0..self.shape.n_providers).all(|p| {
                self.count_at(AgentId::user(u), p) == self.count_at(AgentId::provider(p), u)
            })
        })
    }
}

/// `sqrt(2 sigma2 alpha ln(t) / count)`.
pub fn ucb_bonus<T: Scalar>(sigma2: T, alpha: T, t: u64, count: u64) -> T {
    let log_t = T::from_count(t).ln();
    (T::two() * sigma2 * alpha * log_t / T::from_count(count)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const U: AgentId = AgentId::user(0);
    const P: AgentId = AgentId::provider(0);

    fn means(up: f64, pu: f64) -> PreferenceTable<f64> {
        let shape = MarketShape::new(1, 1).unwrap();
        PreferenceTable::new(shape, vec![vec![up]], vec![vec![pu]]).unwrap()
    }

    #[test]
    fn warm_start_of_one_sets_unit_counts() {
        let shape = MarketShape::new(3, 2).unwrap();
        let mu = PreferenceTable::from_fn(shape, |_, _| 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = LearnerState::init_warm_start(shape, 1.0, 3.0, 1, &mu, RewardDist::Gaussian, &mut rng).unwrap();
        for u in 0..3 {
            for p in 0..2 {
                assert_eq!(s.count(AgentId::user(u), AgentId::provider(p)).unwrap(), 1);
                assert_eq!(s.count(AgentId::provider(p), AgentId::user(u)).unwrap(), 1);
            }
        }
        assert!(s.counts_symmetric());
        assert_eq!(s.total_count(), 12);
    }

    #[test]
    fn zero_noise_recovers_the_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = LearnerState::init_warm_start(means(0.4, 0.9).shape(), 0.0, 3.0, 1, &means(0.4, 0.9), RewardDist::Gaussian, &mut rng)
            .unwrap();
        assert_eq!(s.mean(U, P).unwrap(), 0.4);
    }

    #[test]
    fn warm_start_is_seed_deterministic() {
        let mu = means(0.4, 0.9);
        let build = || {
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            LearnerState::init_warm_start(mu.shape(), 0.25, 3.0, 4, &mu, RewardDist::Gaussian, &mut rng).unwrap()
        };
        assert_eq!(build(), build());
    }

    #[test]
    fn alpha_must_exceed_two() {
        let mu = means(0.4, 0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(LearnerState::init_warm_start(mu.shape(), 1.0, 2.0, 1, &mu, RewardDist::Gaussian, &mut rng).is_err());
        assert!(LearnerState::init_warm_start(mu.shape(), 1.0, 3.0, 0, &mu, RewardDist::Gaussian, &mut rng).is_err());
    }

    #[test]
    fn observe_updates_one_direction() {
        let mut s = LearnerState::empty(MarketShape::new(1, 1).unwrap(), 1.0, 3.0).unwrap();
        for x in [0.5, 0.25, 0.75] {
            s.observe(U, P, x).unwrap();
        }
        assert_eq!(s.count(U, P).unwrap(), 3);
        assert_eq!(s.sum(U, P).unwrap(), 1.5);
        s.observe(U, P, 0.5).unwrap();
        assert_eq!(s.count(U, P).unwrap(), 4);
        assert_eq!(s.sum(U, P).unwrap(), 2.0);
        assert_eq!(s.mean(U, P).unwrap(), 0.5);
        assert_eq!(s.count(P, U).unwrap(), 0);
        assert!(s.observe(U, AgentId::user(0), 1.0).is_err());
    }

    #[test]
    fn observe_order_does_not_matter() {
        let base = LearnerState::<f64>::empty(MarketShape::new(1, 1).unwrap(), 1.0, 3.0).unwrap();
        let mut a = base.clone();
        a.observe(U, P, 0.25).unwrap();
        a.observe(U, P, 0.5).unwrap();
        let mut b = base;
        b.observe(U, P, 0.5).unwrap();
        b.observe(U, P, 0.25).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ucb_index_direct_substitution() {
        let mut s = LearnerState::empty(MarketShape::new(1, 1).unwrap(), 1.0, 3.0).unwrap();
        for _ in 0..6 {
            s.observe(U, P, 0.5).unwrap();
        }
        // Choose t so that ln(t) is as close to 1 as an integer allows and
        // check against the closed form.
        let t = 3u64;
        let expected = 0.5 + (2.0 * 1.0 * 3.0 * (3f64).ln() / 6.0).sqrt();
        assert!((s.ucb_index(U, Some(P), t).unwrap() - expected).abs() < 1e-15);
        // ln(t) = 1 exactly through the bonus helper with real-valued t.
        let bonus_at_e = (2.0f64 * 1.0 * 3.0 * std::f64::consts::E.ln() / 6.0).sqrt();
        assert!((0.5 + bonus_at_e - 1.5).abs() < 1e-15);
        assert_eq!(s.ucb_index(U, Some(P), 1).unwrap(), 0.5);
        assert_eq!(s.ucb_index(U, None, 7).unwrap(), 0.0);
    }

    #[test]
    fn ucb_without_samples_errors() {
        let s = LearnerState::<f64>::empty(MarketShape::new(1, 1).unwrap(), 1.0, 3.0).unwrap();
        assert!(matches!(s.ucb_index(U, Some(P), 5), Err(MarketError::MissingWarmStart(..))));
        assert!(s.transient(5).is_err());
    }
}
