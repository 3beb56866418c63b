use serde::{Deserialize, Serialize};

use crate::error::{MarketError, Result};
use crate::metrics::GapStats;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Pessimal regret under the zero rule.
    Prop1Pessimal,
    /// Balanced transfers with pairwise-unique `rho`.
    Thm1,
    /// Uniqueness-forcing prices.
    Thm2,
}

impl BoundKind {
    pub const ALL: [BoundKind; 3] = [BoundKind::Prop1Pessimal, BoundKind::Thm1, BoundKind::Thm2];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Prop1Pessimal => "prop1_pessimal",
            BoundKind::Thm1 => "thm1",
            BoundKind::Thm2 => "thm2",
        }
    }
}

/// `factor * N^2 L * (8 sigma2 alpha ln_t / gap^2 + alpha / (alpha - 2))`.
pub fn bound_formula<T: Scalar>(
    factor: T,
    n_users: usize,
    n_providers: usize,
    sigma2: T,
    alpha: T,
    ln_t: T,
    gap: T,
) -> Result<T> {
    if !(alpha > T::two()) {
        return Err(MarketError::Parameter(format!("alpha must exceed 2, got {alpha}")));
    }
    if !(gap > T::zero()) {
        return Err(MarketError::ZeroGap("the minimum preference gap".into()));
    }
    let n = T::from_count(n_users as u64);
    let l = T::from_count(n_providers as u64);
    let eight = T::lit(8.0);
    let inner = eight * sigma2 * alpha * ln_t / (gap * gap) + alpha / (alpha - T::two());
    Ok(factor * n * n * l * inner)
}

/// Per-agent bound value at `horizon`, indexed by agent slot.
pub fn theoretical_bound<T: Scalar>(
    kind: BoundKind,
    gaps: &GapStats<T>,
    sigma2: T,
    alpha: T,
    horizon: u64,
) -> Result<Vec<T>> {
    if horizon < 1 {
        return Err(MarketError::Parameter("bounds need a horizon of at least 1".into()));
    }
    let ln_t = T::from_count(horizon).ln();
    let (factors, gap): (Vec<T>, T) = match kind {
        BoundKind::Prop1Pessimal => (gaps.delta_max.iter().map(|&d| T::two() * d).collect(), gaps.delta_min),
        BoundKind::Thm1 => {
            let star = gaps.delta_rho_max_star.as_ref().ok_or_else(|| {
                MarketError::Parameter("rho is not pairwise-unique; the balanced bound does not apply".into())
            })?;
            (star.clone(), gaps.delta_rho_min)
        }
        BoundKind::Thm2 => {
            let star = gaps.delta_b_max_star.as_ref().ok_or_else(|| {
                MarketError::Parameter("no unique stable matching under the supplied prices".into())
            })?;
            (star.iter().map(|&d| T::two() * d).collect(), gaps.delta_min)
        }
    };
    factors
        .into_iter()
        .map(|f| bound_formula(f, gaps.shape.n_users, gaps.shape.n_providers, sigma2, alpha, ln_t, gap))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pessimal_substitution() {
        // 2 * 9 * 3 * 1 * (8 * 3 / 0.01 + 3)
        let b: f64 = bound_formula(2.0, 3, 3, 1.0, 3.0, 1.0, 0.1).unwrap();
        assert!((b - 129_762.0).abs() < 1e-6);
    }

    #[test]
    fn zero_factor_gives_zero() {
        assert_eq!(bound_formula(0.0, 3, 3, 1.0, 3.0, 1.0, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn balanced_substitution() {
        // 0.5 * 4 * 2 * (8 * 0.25 * 4 * 2 / 0.04 + 2)
        let b: f64 = bound_formula(0.5, 2, 2, 0.25, 4.0, 2.0, 0.2).unwrap();
        assert!((b - 1608.0).abs() < 1e-9);
    }

    #[test]
    fn zero_gap_errors() {
        let err = bound_formula(1.0, 2, 2, 1.0, 3.0, 1.0, 0.0).unwrap_err();
        assert!(matches!(err, MarketError::ZeroGap(_)));
        assert!(bound_formula(1.0, 2, 2, 1.0, 2.0, 1.0, 0.1).is_err());
    }
}
