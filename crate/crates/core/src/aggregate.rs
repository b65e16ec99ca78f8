//! Symmetric aggregation of ensemble predictions.
//!
//! Inputs are sorted before any arithmetic, so every aggregate is exactly
//! invariant to the order of its inputs, including the floating-point sum
//! behind the mean.

use serde::{Deserialize, Serialize};

use crate::error::{config_invalid, Result};
use crate::quantile::{snapped_ceil, snapped_floor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AggregationKind {
    Mean,
    Median,
    /// Mean of order statistics `floor(c k) + 1 ..= ceil((1 - c) k)`.
    TrimmedMean {
        proportion_cut: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregationSpec {
    pub kind: AggregationKind,
    /// Output for an empty collection.
    #[serde(default)]
    pub empty_default: f64,
}

impl AggregationSpec {
    pub fn mean() -> Self {
        Self::of(AggregationKind::Mean)
    }

    pub fn median() -> Self {
        Self::of(AggregationKind::Median)
    }

    pub fn trimmed_mean(proportion_cut: f64) -> Self {
        Self::of(AggregationKind::TrimmedMean { proportion_cut })
    }

    pub fn of(kind: AggregationKind) -> Self {
        Self {
            kind,
            empty_default: 0.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            AggregationKind::Mean => "mean",
            AggregationKind::Median => "median",
            AggregationKind::TrimmedMean { .. } => "trimmed-mean",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let AggregationKind::TrimmedMean { proportion_cut } = self.kind {
            if !(0.0..0.5).contains(&proportion_cut) {
                return Err(config_invalid(format!(
                    "trimmed-mean proportion_cut must lie in [0, 0.5), got {proportion_cut}"
                )));
            }
        }
        if !self.empty_default.is_finite() {
            return Err(config_invalid("empty_default must be finite"));
        }
        Ok(())
    }
}

impl Default for AggregationSpec {
    fn default() -> Self {
        Self::mean()
    }
}

/// Aggregates `predictions` in place order-independently. Empty input
/// yields `spec.empty_default`.
pub fn aggregate(spec: &AggregationSpec, predictions: &[f64]) -> f64 {
    if predictions.is_empty() {
        return spec.empty_default;
    }
    let mut sorted = predictions.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let k = sorted.len();
    match spec.kind {
        AggregationKind::Mean => sorted.iter().sum::<f64>() / k as f64,
        AggregationKind::Median => {
            if k % 2 == 1 {
                sorted[k / 2]
            } else {
                (sorted[k / 2 - 1] + sorted[k / 2]) / 2.0
            }
        }
        AggregationKind::TrimmedMean { proportion_cut } => {
            let lo = snapped_floor(proportion_cut * k as f64);
            let hi = snapped_ceil((1.0 - proportion_cut) * k as f64).min(k);
            if hi <= lo {
                return spec.empty_default;
            }
            sorted[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trimmed_mean_of_four() {
        assert_eq!(
            aggregate(&AggregationSpec::trimmed_mean(0.25), &[4.0, 1.0, 3.0, 2.0]),
            2.5
        );
    }

    #[test]
    fn trimmed_mean_window_uses_outer_rounding() {
        // k = 5: floor(1.25) = 1, ceil(3.75) = 4 -> mean of y(2), y(3), y(4).
        let v = [10.0, 1.0, 2.0, 3.0, 100.0];
        assert_eq!(aggregate(&AggregationSpec::trimmed_mean(0.25), &v), 5.0);
    }

    #[test]
    fn median_even_length() {
        assert_eq!(
            aggregate(&AggregationSpec::median(), &[1.0, 2.0, 3.0, 4.0]),
            2.5
        );
        assert_eq!(aggregate(&AggregationSpec::median(), &[3.0, 1.0, 2.0]), 2.0);
    }

    #[test]
    fn empty_collection_defaults_to_zero() {
        assert_eq!(aggregate(&AggregationSpec::mean(), &[]), 0.0);
        let spec = AggregationSpec {
            kind: AggregationKind::Median,
            empty_default: -1.5,
        };
        assert_eq!(aggregate(&spec, &[]), -1.5);
    }

    #[test]
    fn cut_out_of_range() {
        assert!(AggregationSpec::trimmed_mean(0.5).validate().is_err());
        assert!(AggregationSpec::trimmed_mean(-0.1).validate().is_err());
        assert!(AggregationSpec::trimmed_mean(0.0).validate().is_ok());
    }
}
