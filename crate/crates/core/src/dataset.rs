use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feature matrix (row-major, `n x p`) with its response vector.
///
/// Every entry is finite; construction goes through [`Dataset::new`] or
/// [`Dataset::from_rows`], which enforce that.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<f64>,
    responses: Vec<f64>,
    n_features: usize,
}

impl Dataset {
    /// Validates a flat row-major feature buffer against the responses.
    pub fn new(features: Vec<f64>, n_features: usize, responses: Vec<f64>) -> Result<Self> {
        let n = responses.len();
        if features.len() != n * n_features {
            return Err(Error::DimensionMismatch(format!(
                "{} feature entries cannot form {} rows of {} features",
                features.len(),
                n,
                n_features
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                location: format!(
                    "feature row {}, column {}",
                    pos / n_features,
                    pos % n_features
                ),
            });
        }
        if let Some(pos) = responses.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                location: format!("response {pos}"),
            });
        }
        Ok(Self {
            features,
            responses,
            n_features,
        })
    }

    /// Builds a dataset from one vector per row. Ragged rows are rejected.
    pub fn from_rows(rows: &[Vec<f64>], responses: Vec<f64>) -> Result<Self> {
        if rows.len() != responses.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature rows but {} responses",
                rows.len(),
                responses.len()
            )));
        }
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(Error::DimensionMismatch(format!(
                "row {bad} has {} features, expected {p}",
                rows[bad].len()
            )));
        }
        Self::new(rows.concat(), p, responses)
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn response(&self, i: usize) -> f64 {
        self.responses[i]
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |i| self.row(i))
    }

    /// New dataset made of the given rows, in the given order (repeats allowed).
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut responses = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            responses.push(self.responses[i]);
        }
        Dataset {
            features,
            responses,
            n_features: self.n_features,
        }
    }

    /// Appends one point; used to build the augmented `n + 1` sample.
    pub fn with_point(&self, x: &[f64], y: f64) -> Result<Dataset> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch(format!(
                "point has {} features, dataset has {}",
                x.len(),
                self.n_features
            )));
        }
        let mut features = self.features.clone();
        features.extend_from_slice(x);
        let mut responses = self.responses.clone();
        responses.push(y);
        Dataset::new(features, self.n_features, responses)
    }

    /// Returns a copy with `shift` added to every response.
    pub fn shift_responses(&self, shift: f64) -> Result<Dataset> {
        let responses = self.responses.iter().map(|y| y + shift).collect();
        Dataset::new(self.features.clone(), self.n_features, responses)
    }
}

/// Validates raw row-major input; the `validate_dataset` entry point.
pub fn validate_dataset(raw_features: &[Vec<f64>], raw_responses: &[f64]) -> Result<Dataset> {
    Dataset::from_rows(raw_features, raw_responses.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed_input() {
        let d = validate_dataset(
            &[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
            &[1.0, 2.0, 3.0],
        )
        .unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.row(1), &[3.0, 4.0]);
        assert_eq!(d.responses(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn row_count_mismatch() {
        let err = validate_dataset(
            &[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
            &[1.0, 2.0],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn nan_rejected() {
        let err = validate_dataset(&[vec![1.0, f64::NAN]], &[1.0]).unwrap_err();
        assert!(matches!(err, Error::NonFiniteValue { .. }));
        let err = validate_dataset(&[vec![1.0]], &[f64::INFINITY]).unwrap_err();
        assert!(matches!(err, Error::NonFiniteValue { .. }));
    }

    #[test]
    fn ragged_rows() {
        assert!(validate_dataset(&[vec![1.0], vec![1.0, 2.0]], &[0.0, 0.0]).is_err());
    }
}
