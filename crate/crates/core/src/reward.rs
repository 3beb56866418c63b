use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Reward law `D(a, b)` around the true mean `mu(a, b)`, each
/// `sigma2`-sub-Gaussian for the scenario's `sigma2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardDist {
    /// `N(mu, sigma2)`.
    #[default]
    Gaussian,
    /// `mu + sigma` or `mu - sigma` with equal probability.
    BernoulliShifted,
    /// Uniform on `[mu - sigma, mu + sigma]`.
    UniformBounded,
}

impl RewardDist {
    pub fn sample<T: Scalar, R: Rng + ?Sized>(self, mean: T, sigma2: T, rng: &mut R) -> T {
        let sigma = sigma2.to_f64_lossy().sqrt();
        let noise = match self {
            RewardDist::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                sigma * z
            }
            RewardDist::BernoulliShifted => {
                if rng.random::<bool>() {
                    sigma
                } else {
                    -sigma
                }
            }
            RewardDist::UniformBounded => sigma * (2.0 * rng.random::<f64>() - 1.0),
        };
        mean + T::lit(noise)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_variance_returns_the_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [RewardDist::Gaussian, RewardDist::BernoulliShifted, RewardDist::UniformBounded] {
            assert_eq!(d.sample(0.4f64, 0.0, &mut rng), 0.4);
        }
    }

    #[test]
    fn bounded_laws_stay_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let x = RewardDist::UniformBounded.sample(0.5f64, 0.04, &mut rng);
            assert!((0.3..=0.7).contains(&x));
            let y = RewardDist::BernoulliShifted.sample(0.5f64, 0.04, &mut rng);
            assert!((y - 0.3).abs() < 1e-12 || (y - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_mean_is_close() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 20_000;
        let s: f64 = (0..n).map(|_| RewardDist::Gaussian.sample(1.0, 0.25, &mut rng)).sum();
        assert!((s / n as f64 - 1.0).abs() < 0.02);
    }
}
