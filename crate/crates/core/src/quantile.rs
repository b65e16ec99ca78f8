//! Order-statistic quantiles `q+` and `q-`.
//!
//! `q_plus(v, alpha)` is the `ceil((1 - alpha)(n + 1))`-th smallest entry of
//! `v`, or `+inf` when that rank exceeds `n`. `q_minus` mirrors it through
//! negation. No interpolation.

use crate::error::{Error, Result};

const SNAP_TOLERANCE: f64 = 1e-9;

/// `ceil(x)` where values within `1e-9` of an integer are taken as that integer.
pub fn snapped_ceil(x: f64) -> usize {
    let nearest = x.round();
    let k = if (x - nearest).abs() <= SNAP_TOLERANCE {
        nearest
    } else {
        x.ceil()
    };
    k.max(0.0) as usize
}

/// `floor(x)` with the same snap-to-integer guard as [`snapped_ceil`].
pub fn snapped_floor(x: f64) -> usize {
    let nearest = x.round();
    let k = if (x - nearest).abs() <= SNAP_TOLERANCE {
        nearest
    } else {
        x.floor()
    };
    k.max(0.0) as usize
}

/// Rank `k = ceil((1 - alpha)(n + 1))`, 1-indexed.
///
/// This is also the smallest integer count satisfying
/// `count >= (1 - alpha)(n + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantileIndex {
    pub k: usize,
    pub n: usize,
}

impl QuantileIndex {
    pub fn new(alpha: f64, n: usize) -> Self {
        Self {
            k: snapped_ceil((1.0 - alpha) * (n as f64 + 1.0)),
            n,
        }
    }

    /// `k > n`: the quantile is infinite.
    pub fn overflows(&self) -> bool {
        self.k > self.n
    }
}

fn kth_smallest(values: &[f64], k: usize) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    sorted[k - 1]
}

pub fn q_plus(values: &[f64], alpha: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("quantile of an empty list"));
    }
    let idx = QuantileIndex::new(alpha, values.len());
    if idx.overflows() {
        return Ok(f64::INFINITY);
    }
    // k == 0 only for alpha >= 1, which callers reject; clamp to the minimum.
    Ok(kth_smallest(values, idx.k.max(1)))
}

pub fn q_minus(values: &[f64], alpha: f64) -> Result<f64> {
    let negated: Vec<f64> = values.iter().map(|v| -v).collect();
    Ok(-q_plus(&negated, alpha)?)
}
