//! Minimal learners with closed-form behaviour, handy for hand-checked
//! traces and oracle runs.

use super::{CanonicalRows, Predictor, Regressor};
use crate::dataset::Dataset;
use crate::error::Result;

/// Predicts the mean training response everywhere.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanResponse;

/// Ignores its training data and predicts `0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl Predictor for Constant {
    fn predict(&self, _x: &[f64]) -> f64 {
        self.0
    }
}

impl Regressor for MeanResponse {
    type Model = Constant;

    fn fit(&self, data: &Dataset, sample: &[usize], _fit_seed: u64) -> Result<Constant> {
        let rows = CanonicalRows::new(data, sample)?;
        let sum: f64 = rows.responses.iter().sum();
        Ok(Constant(sum / rows.len() as f64))
    }
}

impl Regressor for ZeroModel {
    type Model = Constant;

    fn fit(&self, data: &Dataset, sample: &[usize], _fit_seed: u64) -> Result<Constant> {
        CanonicalRows::new(data, sample)?;
        Ok(Constant(0.0))
    }
}
