use serde::Serialize;

use crate::market::Trace;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct WelfareRatio<T> {
    pub ratio: T,
    /// Both the realized and the best achievable welfare were zero. The ratio
    /// is then reported as 1, though welfare is low rather than high.
    pub degenerate_zero: bool,
}

/// `W_t / W_max` for every step.
pub fn welfare_ratio_series<T: Scalar>(trace: &Trace<T>) -> Vec<WelfareRatio<T>> {
    trace
        .records
        .iter()
        .map(|r| {
            if r.welfare == T::zero() && r.welfare_max == T::zero() {
                WelfareRatio {
                    ratio: T::one(),
                    degenerate_zero: true,
                }
            } else {
                WelfareRatio {
                    ratio: r.welfare / r.welfare_max,
                    degenerate_zero: false,
                }
            }
        })
        .collect()
}

/// Smallest ratio of a series; `None` for an empty one.
pub fn min_welfare_ratio<T: Scalar>(series: &[WelfareRatio<T>]) -> Option<T> {
    series.iter().map(|w| w.ratio).reduce(T::min)
}
