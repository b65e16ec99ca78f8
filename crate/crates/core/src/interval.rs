use serde::{Deserialize, Serialize};

use crate::error::{config_invalid, Error, Result};

/// Closed interval `[lower, upper]`; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionInterval {
    pub lower: f64,
    pub upper: f64,
}

impl PredictionInterval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(config_invalid(format!(
                "invalid interval [{lower}, {upper}]"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// `[q_minus, q_plus]` from the jackknife+ family; crossed quantiles
    /// yield [`Error::EmptySet`].
    pub fn from_quantiles(lower: f64, upper: f64) -> Result<Self> {
        if lower > upper {
            return Err(Error::EmptySet { lower, upper });
        }
        Self::new(lower, upper)
    }

    pub fn unbounded() -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn contains(&self, y: f64) -> bool {
        self.lower <= y && y <= self.upper
    }

    /// `true` when `other` lies inside `self` (endpoint comparison).
    pub fn contains_interval(&self, other: &PredictionInterval) -> bool {
        self.lower <= other.lower && other.upper <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn is_finite(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }
}
