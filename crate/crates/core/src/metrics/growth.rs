//! Heuristic classification of a cumulative regret curve observed at a few
//! horizons. Asymptotic growth cannot be decided from finite data; this only
//! labels what the sampled curve looks like.
//!
//! The curve is treated as piecewise linear through the origin. Let `r` be
//! the steepest segment slope. The curve is
//!
//! * `Linear` when every segment in the last half of the checkpoints keeps a
//!   slope of at least `r / 2`;
//! * `Logarithmic` when it is flat, when it does not grow over the last half
//!   (regret is only ever bounded from above), or when the last-half slopes
//!   fall below
//!   `r / 2`, the growth per unit of `ln(h)` does not accelerate by more than
//!   half between the early and late checkpoints, and a least-squares fit
//!   against `ln(h)` leaves no more residual than a fit against `h`. A curve
//!   that first falls is instead compared with the per-`ln(h)` rate that a
//!   logarithm reaching its largest magnitude would have;
//! * `Indeterminate` otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{MarketError, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Logarithmic,
    Linear,
    Indeterminate,
}

const SLOPE_FRACTION: f64 = 0.5;
const LOG_ACCELERATION: f64 = 1.5;
const FLAT_TOLERANCE: f64 = 1e-9;

/// Residual sum of squares of the least-squares line `y ~ a + b x`.
fn ssr(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - (my + slope * (a - mx));
            e * e
        })
        .sum()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn growth_classifier<T: Scalar>(curve: &[(u64, T)]) -> Result<Growth> {
    if curve.len() < 4 {
        return Err(MarketError::InsufficientData(format!(
            "growth classification needs at least 4 checkpoints, got {}",
            curve.len()
        )));
    }
    if curve[0].0 < 1 || curve.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(MarketError::Parameter("checkpoint horizons must be increasing and positive".into()));
    }
    let h: Vec<f64> = curve.iter().map(|&(x, _)| x as f64).collect();
    let v: Vec<f64> = curve.iter().map(|&(_, y)| y.to_f64_lossy()).collect();
    if v.iter().any(|x| !x.is_finite()) {
        return Err(MarketError::Parameter("curve values must be finite".into()));
    }
    let n = v.len();

    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let range = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min);
    if scale == 0.0 || range <= FLAT_TOLERANCE * scale {
        return Ok(Growth::Logarithmic);
    }

    // slopes[i] is the segment ending at checkpoint i; slopes[0] starts at 0.
    let slopes: Vec<f64> = (0..n)
        .map(|i| if i == 0 { v[0] / h[0] } else { (v[i] - v[i - 1]) / (h[i] - h[i - 1]) })
        .collect();
    let steepest = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let late = &slopes[n / 2..];
    if steepest > 0.0 && late.iter().all(|&s| s >= SLOPE_FRACTION * steepest) {
        return Ok(Growth::Linear);
    }
    let decelerating = late.iter().all(|&s| s < SLOPE_FRACTION * steepest);

    let per_log: Vec<f64> = (1..n).map(|i| (v[i] - v[i - 1]) / (h[i] / h[i - 1]).ln()).collect();
    let split = (n / 2).saturating_sub(1).max(1);
    let early_d = mean(&per_log[..split]);
    let late_d = mean(&per_log[split..]);
    if late_d <= 0.0 {
        return Ok(Growth::Logarithmic);
    }
    let ln_h: Vec<f64> = h.iter().map(|x| x.ln()).collect();
    let (no_acceleration, log_fits) = if early_d > 0.0 {
        (late_d <= LOG_ACCELERATION * early_d, ssr(&ln_h, &v) <= ssr(&h, &v))
    } else {
        // The curve fell before rising, so neither fit is informative. Compare
        // the recovery with the rate a pure `c ln h` curve needs to reach the
        // observed magnitude.
        let reference = scale / ln_h[n - 1];
        (late_d <= LOG_ACCELERATION * reference, true)
    };

    if decelerating && no_acceleration && log_fits {
        Ok(Growth::Logarithmic)
    } else {
        Ok(Growth::Indeterminate)
    }
}

/// `count` horizons ending at `horizon`, each half the next, deduplicated
/// and at least 1.
pub fn geometric_checkpoints(horizon: u64, count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = (0..count)
        .map(|k| {
            let shift = (count - 1 - k) as u32;
            horizon.checked_shr(shift).unwrap_or(0).max(1)
        })
        .collect();
    out.dedup();
    out.retain(|&x| x <= horizon);
    out
}
