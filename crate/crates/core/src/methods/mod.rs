//! Interval estimators built on out-of-bag and leave-one-out models.

mod jab;
mod jackknife;
mod score;
mod stability;

pub use jab::{
    draw_jab_samples, fit_jab, fit_jab_with_samples, predict_jab, predict_jmm_ab, resolve_b,
    JabPredictor, LooEnsemble, LooResiduals,
};
pub use jackknife::{
    fit_jackknife, fit_jplus, predict_jackknife, predict_jplus, JackknifeFit, JplusFit,
    JplusVariant,
};
pub use score::{predict_score_jab, training_scores, ConformityScore, PredictionSet};
pub use stability::{
    estimate_ensemble_stability, inflate, stability_delta, theorem_s2_level, theorem_s3_level,
    StabilityEstimate, StabilityParams,
};

use crate::counters::CostSnapshot;
use crate::error::Result;
use crate::interval::PredictionInterval;

/// A fitted interval method that can be queried at new feature vectors.
pub trait IntervalPredictor: Sync {
    fn interval(&self, x: &[f64], alpha: f64) -> Result<PredictionInterval>;

    /// Counters accumulated so far, fitting included.
    fn counters(&self) -> CostSnapshot;
}
