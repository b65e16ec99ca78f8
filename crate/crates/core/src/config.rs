use serde::{Deserialize, Serialize};

use crate::aggregate::AggregationSpec;
use crate::error::{config_invalid, Result};
use crate::regress::RegressorSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Bootstrap draws.
    WithReplacement,
    /// Subsampling draws; requires `m <= n`.
    WithoutReplacement,
}

/// How many ensemble members are fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BMode {
    /// Exactly `B` members.
    Fixed(usize),
    /// `B ~ Binomial(b_tilde, theta)`, drawn once per fit.
    Random(usize),
}

/// Whether data-parallel loops may use the rayon pool.
///
/// `Parallel` silently degrades to sequential execution when the crate is
/// built without the `parallel` feature. Results are identical either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub alpha: f64,
    pub m: usize,
    pub sampling: SamplingMode,
    pub b_mode: BMode,
    pub regressor: RegressorSpec,
    pub aggregation: AggregationSpec,
    pub seed: u64,
    #[serde(default)]
    pub execution: Execution,
}

impl MethodConfig {
    /// Checks the parts of the configuration that do not depend on `n`.
    pub fn validate(&self) -> Result<()> {
        validate_alpha(self.alpha)?;
        if self.m == 0 {
            return Err(config_invalid("resample size m must be at least 1"));
        }
        if let BMode::Random(0) = self.b_mode {
            return Err(config_invalid("b_tilde must be at least 1"));
        }
        self.regressor.validate()?;
        self.aggregation.validate()
    }

    /// Checks the configuration against a training set of size `n`.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        self.validate()?;
        if self.sampling == SamplingMode::WithoutReplacement && self.m > n {
            return Err(config_invalid(format!(
                "m = {} exceeds n = {n} for sampling without replacement",
                self.m
            )));
        }
        Ok(())
    }
}

pub fn validate_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(config_invalid(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}
