//! Symmetric base regression algorithms.
//!
//! Every learner first puts its training multiset into a canonical order
//! (rows sorted lexicographically by features, then response), so a fit
//! depends only on the multiset of rows and never on their order. All
//! floating-point reductions run in that canonical order, which makes
//! permutation invariance hold bit-for-bit.

mod forest;
mod knn;
pub mod reference;
mod ridge;
mod tree;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{config_invalid, Error, Result};
use crate::rng::{mix, splitmix64};

pub use forest::ForestModel;
pub use knn::KnnModel;
pub use ridge::{ridge_penalty, spectral_norm_squared, RidgeModel};
pub use tree::TreeModel;

/// A fitted regression function.
pub trait Predictor: Send + Sync {
    fn predict(&self, x: &[f64]) -> f64;
}

/// A regression algorithm `R` mapping a training multiset to a model.
///
/// `sample` lists row indices of `data`, repeats allowed. `fit_seed` feeds
/// randomized learners; deterministic learners ignore it.
pub trait Regressor: Sync {
    type Model: Predictor;

    fn fit(&self, data: &Dataset, sample: &[usize], fit_seed: u64) -> Result<Self::Model>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegressorSpec {
    /// Ridge with unpenalized intercept; `lambda = lambda_factor * ||X||^2`.
    Ridge {
        lambda_factor: f64,
    },
    Knn {
        k: usize,
    },
    /// Regression tree grown on absolute-deviation reduction, median leaves.
    Tree {
        max_depth: usize,
        min_leaf: usize,
    },
    /// Mean of trees grown on the full training multiset, each split
    /// considering a random fraction `feature_subsample` of the features.
    Forest {
        n_trees: usize,
        max_depth: usize,
        min_leaf: usize,
        feature_subsample: f64,
    },
}

impl RegressorSpec {
    pub fn ridge() -> Self {
        RegressorSpec::Ridge {
            lambda_factor: 0.001,
        }
    }

    pub fn knn() -> Self {
        RegressorSpec::Knn { k: 5 }
    }

    pub fn tree() -> Self {
        RegressorSpec::Tree {
            max_depth: 6,
            min_leaf: 2,
        }
    }

    pub fn forest() -> Self {
        RegressorSpec::Forest {
            n_trees: 20,
            max_depth: 6,
            min_leaf: 2,
            feature_subsample: 0.6,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RegressorSpec::Ridge { .. } => "ridge",
            RegressorSpec::Knn { .. } => "knn",
            RegressorSpec::Tree { .. } => "tree",
            RegressorSpec::Forest { .. } => "forest",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RegressorSpec::Ridge { lambda_factor } => {
                if !(lambda_factor > 0.0 && lambda_factor.is_finite()) {
                    return Err(config_invalid("ridge lambda_factor must be positive"));
                }
            }
            RegressorSpec::Knn { k } => {
                if k == 0 {
                    return Err(config_invalid("knn k must be positive"));
                }
            }
            RegressorSpec::Tree {
                max_depth,
                min_leaf,
            } => {
                if max_depth == 0 || min_leaf == 0 {
                    return Err(config_invalid(
                        "tree max_depth and min_leaf must be positive",
                    ));
                }
            }
            RegressorSpec::Forest {
                n_trees,
                max_depth,
                min_leaf,
                feature_subsample,
            } => {
                if n_trees == 0 || max_depth == 0 || min_leaf == 0 {
                    return Err(config_invalid(
                        "forest n_trees, max_depth and min_leaf must be positive",
                    ));
                }
                if !(feature_subsample > 0.0 && feature_subsample <= 1.0) {
                    return Err(config_invalid(
                        "forest feature_subsample must lie in (0, 1]",
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Ridge(RidgeModel),
    Knn(KnnModel),
    Tree(TreeModel),
    Forest(ForestModel),
}

impl Predictor for FittedModel {
    fn predict(&self, x: &[f64]) -> f64 {
        match self {
            FittedModel::Ridge(m) => m.predict(x),
            FittedModel::Knn(m) => m.predict(x),
            FittedModel::Tree(m) => m.predict(x),
            FittedModel::Forest(m) => m.predict(x),
        }
    }
}

impl Regressor for RegressorSpec {
    type Model = FittedModel;

    fn fit(&self, data: &Dataset, sample: &[usize], fit_seed: u64) -> Result<FittedModel> {
        self.validate()?;
        let rows = CanonicalRows::new(data, sample)?;
        Ok(match *self {
            RegressorSpec::Ridge { lambda_factor } => {
                FittedModel::Ridge(RidgeModel::fit(&rows, lambda_factor)?)
            }
            RegressorSpec::Knn { k } => FittedModel::Knn(KnnModel::fit(&rows, k)),
            RegressorSpec::Tree {
                max_depth,
                min_leaf,
            } => FittedModel::Tree(TreeModel::fit(&rows, max_depth, min_leaf)),
            RegressorSpec::Forest {
                n_trees,
                max_depth,
                min_leaf,
                feature_subsample,
            } => FittedModel::Forest(ForestModel::fit(
                &rows,
                n_trees,
                max_depth,
                min_leaf,
                feature_subsample,
                fit_seed,
            )),
        })
    }
}

/// Training rows copied out in canonical order.
#[derive(Debug, Clone)]
pub(crate) struct CanonicalRows {
    pub features: Vec<f64>,
    pub responses: Vec<f64>,
    pub p: usize,
}

impl CanonicalRows {
    pub fn new(data: &Dataset, sample: &[usize]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptyInput("training sample"));
        }
        let mut order = sample.to_vec();
        order.sort_by(|&a, &b| compare_rows(data, a, b));
        let selected = data.select(&order);
        Ok(Self {
            features: selected.features().to_vec(),
            responses: selected.responses().to_vec(),
            p: data.n_features(),
        })
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.p..(i + 1) * self.p]
    }

    /// Order-independent fingerprint of the multiset.
    pub fn fingerprint(&self) -> u64 {
        let bits = self
            .features
            .iter()
            .chain(self.responses.iter())
            .map(|v| v.to_bits());
        bits.fold(splitmix64(self.len() as u64), |acc, b| mix(&[acc, b]))
    }
}

fn compare_rows(data: &Dataset, a: usize, b: usize) -> Ordering {
    data.row(a)
        .iter()
        .zip(data.row(b))
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| data.response(a).total_cmp(&data.response(b)))
}

/// Median with even-length averaging; `values` must be non-empty.
pub(crate) fn median_of(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        (values[k / 2 - 1] + values[k / 2]) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sample_is_rejected() {
        let d = Dataset::from_rows(&[vec![1.0]], vec![1.0]).unwrap();
        for spec in [
            RegressorSpec::ridge(),
            RegressorSpec::knn(),
            RegressorSpec::tree(),
            RegressorSpec::forest(),
        ] {
            assert!(matches!(spec.fit(&d, &[], 0), Err(Error::EmptyInput(_))));
        }
    }

    #[test]
    fn canonical_order_ignores_sample_order() {
        let d =
            Dataset::from_rows(&[vec![2.0], vec![1.0], vec![1.0]], vec![0.0, 5.0, 4.0]).unwrap();
        let a = CanonicalRows::new(&d, &[0, 1, 2, 1]).unwrap();
        let b = CanonicalRows::new(&d, &[1, 2, 1, 0]).unwrap();
        assert_eq!(a.features, b.features);
        assert_eq!(a.responses, vec![4.0, 5.0, 5.0, 0.0]);
        assert_eq!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn invalid_hyperparameters() {
        assert!(RegressorSpec::Ridge { lambda_factor: 0.0 }
            .validate()
            .is_err());
        assert!(RegressorSpec::Knn { k: 0 }.validate().is_err());
        assert!(RegressorSpec::Tree {
            max_depth: 0,
            min_leaf: 1
        }
        .validate()
        .is_err());
        assert!(RegressorSpec::Forest {
            n_trees: 3,
            max_depth: 2,
            min_leaf: 1,
            feature_subsample: 1.5
        }
        .validate()
        .is_err());
    }
}
