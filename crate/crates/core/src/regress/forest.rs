use super::tree::{Growth, TreeModel};
use super::{CanonicalRows, Predictor};
use crate::rng::{mix, SeededRng};

/// Mean of regression trees grown on the full training multiset.
///
/// The per-split feature draws are seeded from the caller's seed combined
/// with a fingerprint of the canonical row multiset, so the fitted forest is
/// a deterministic function of that multiset and the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    trees: Vec<TreeModel>,
}

impl ForestModel {
    pub(crate) fn fit(
        rows: &CanonicalRows,
        n_trees: usize,
        max_depth: usize,
        min_leaf: usize,
        feature_subsample: f64,
        fit_seed: u64,
    ) -> Self {
        let per_split =
            ((feature_subsample * rows.p as f64).ceil() as usize).clamp(1, rows.p.max(1));
        let growth = Growth {
            rows,
            max_depth,
            min_leaf,
            features_per_split: Some(per_split),
        };
        let base = SeededRng::new(mix(&[fit_seed, rows.fingerprint()]), 0);
        let trees = (0..n_trees)
            .map(|t| {
                let mut rng = base.fork(t as u64);
                TreeModel::grow(&growth, Some(&mut rng))
            })
            .collect();
        Self { trees }
    }
}

impl Predictor for ForestModel {
    fn predict(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        sum / self.trees.len() as f64
    }
}
