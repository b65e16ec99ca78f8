//! J+aB prediction sets for general conformity scores.
//!
//! The set at `x` is every `y` for which fewer than `(1 - alpha)(n + 1)`
//! training points have `c_{phi\i}(x, y) > c_{phi\i}(X_i, Y_i)`.
//! For residual-type scores the set is a finite union of closed intervals
//! and is computed exactly by sweeping the breakpoints. Other scores need a
//! grid of candidate `y` values.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::interval::PredictionInterval;
use crate::quantile::QuantileIndex;
use crate::regress::Predictor;

use super::jab::LooEnsemble;

/// Conformity score `c(x, y)` built on the out-of-bag aggregate
/// `mu = mu_{phi\i}(x)`.
#[derive(Clone, Copy)]
pub enum ConformityScore<'a> {
    /// `|y - mu|`.
    AbsoluteResidual,
    /// `|y - mu| / s(x)` for a positive scale function `s`.
    ScaledResidual(&'a (dyn Fn(&[f64]) -> f64 + Sync)),
    /// Arbitrary score `f(mu, x, y)`; needs a grid.
    Custom(&'a (dyn Fn(f64, &[f64], f64) -> f64 + Sync)),
}

impl std::fmt::Debug for ConformityScore<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ConformityScore::AbsoluteResidual => "AbsoluteResidual",
            ConformityScore::ScaledResidual(_) => "ScaledResidual",
            ConformityScore::Custom(_) => "Custom",
        };
        f.write_str(name)
    }
}

impl ConformityScore<'_> {
    fn eval(&self, mu: f64, x: &[f64], y: f64) -> f64 {
        match self {
            ConformityScore::AbsoluteResidual => (y - mu).abs(),
            ConformityScore::ScaledResidual(scale) => (y - mu).abs() / scale(x),
            ConformityScore::Custom(f) => f(mu, x, y),
        }
    }
}

/// Union of disjoint closed intervals in increasing order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictionSet {
    pub pieces: Vec<PredictionInterval>,
}

impl PredictionSet {
    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn contains(&self, y: f64) -> bool {
        self.pieces.iter().any(|p| p.contains(y))
    }

    /// Smallest interval covering the whole set.
    pub fn hull(&self) -> Option<PredictionInterval> {
        Some(PredictionInterval {
            lower: self.pieces.first()?.lower,
            upper: self.pieces.last()?.upper,
        })
    }
}

/// `c_{phi\i}(X_i, Y_i)` for each training point.
pub fn training_scores<M: Predictor>(
    ens: &LooEnsemble<M>,
    data: &Dataset,
    score: ConformityScore<'_>,
) -> Result<Vec<f64>> {
    if data.len() != ens.n_train() {
        return Err(Error::DimensionMismatch(format!(
            "dataset has {} points, ensemble was fitted on {}",
            data.len(),
            ens.n_train()
        )));
    }
    Ok(ens
        .loo_at_train()
        .iter()
        .enumerate()
        .map(|(i, &mu)| score.eval(mu, data.row(i), data.response(i)))
        .collect())
}

pub fn predict_score_jab<M: Predictor>(
    ens: &LooEnsemble<M>,
    score: ConformityScore<'_>,
    train_scores: &[f64],
    x: &[f64],
    alpha: f64,
    y_grid: Option<&[f64]>,
) -> Result<PredictionSet> {
    crate::config::validate_alpha(alpha)?;
    if train_scores.len() != ens.n_train() {
        return Err(Error::DimensionMismatch(format!(
            "{} training scores for {} training points",
            train_scores.len(),
            ens.n_train()
        )));
    }
    let threshold = QuantileIndex::new(alpha, ens.n_train()).k;
    let loo = ens.loo_predictions(x);
    let scale = match score {
        ConformityScore::AbsoluteResidual => Some(1.0),
        ConformityScore::ScaledResidual(s) => {
            let v = s(x);
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NumericalFailure(format!(
                    "score scale must be positive and finite, got {v}"
                )));
            }
            Some(v)
        }
        ConformityScore::Custom(_) => None,
    };
    match (scale, y_grid) {
        (Some(scale), _) => {
            let bands: Vec<(f64, f64)> = loo
                .iter()
                .zip(train_scores)
                .map(|(&mu, &t)| (mu - t * scale, mu + t * scale))
                .collect();
            Ok(residual_set(&bands, threshold))
        }
        (None, Some(grid)) => Ok(grid_set(&loo, train_scores, score, x, grid, threshold)),
        (None, None) => Err(Error::UnsupportedScore(
            "a custom score needs a y grid to invert".into(),
        )),
    }
}

/// `{y : #{i : y < lo_i} + #{i : y > hi_i} < threshold}`.
fn residual_set(bands: &[(f64, f64)], threshold: usize) -> PredictionSet {
    let count = |y: f64| bands.iter().filter(|&&(lo, hi)| y < lo || y > hi).count();
    let mut points: Vec<f64> = bands.iter().flat_map(|&(lo, hi)| [lo, hi]).collect();
    points.sort_unstable_by(f64::total_cmp);
    points.dedup();

    // The count is constant on each open gap between breakpoints and no
    // larger at a breakpoint than on either neighbouring gap, so the set is
    // a union of closed intervals with breakpoint ends.
    let mut pieces: Vec<PredictionInterval> = Vec::new();
    let mut open: Option<f64> = None;
    if count(f64::NEG_INFINITY) < threshold {
        open = Some(f64::NEG_INFINITY);
    }
    for (j, &p) in points.iter().enumerate() {
        let at = count(p) < threshold;
        let after = match points.get(j + 1) {
            Some(&next) => count(p + (next - p) / 2.0) < threshold,
            None => count(f64::INFINITY) < threshold,
        };
        if at && open.is_none() {
            open = Some(p);
        }
        if !after {
            if let Some(start) = open.take() {
                if at {
                    pieces.push(PredictionInterval {
                        lower: start,
                        upper: p,
                    });
                }
            }
        }
    }
    if let Some(start) = open {
        pieces.push(PredictionInterval {
            lower: start,
            upper: f64::INFINITY,
        });
    }
    PredictionSet { pieces }
}

fn grid_set(
    loo: &[f64],
    train_scores: &[f64],
    score: ConformityScore<'_>,
    x: &[f64],
    grid: &[f64],
    threshold: usize,
) -> PredictionSet {
    let mut ys = grid.to_vec();
    ys.sort_unstable_by(f64::total_cmp);
    ys.dedup();
    let mut pieces: Vec<PredictionInterval> = Vec::new();
    let mut run: Option<(f64, f64)> = None;
    for &y in &ys {
        let exceed = loo
            .iter()
            .zip(train_scores)
            .filter(|&(&mu, &t)| score.eval(mu, x, y) > t)
            .count();
        if exceed < threshold {
            run = Some(match run {
                Some((start, _)) => (start, y),
                None => (y, y),
            });
        } else if let Some((lower, upper)) = run.take() {
            pieces.push(PredictionInterval { lower, upper });
        }
    }
    if let Some((lower, upper)) = run {
        pieces.push(PredictionInterval { lower, upper });
    }
    PredictionSet { pieces }
}
