use super::IntervalPredictor;
use crate::aggregate::{aggregate, AggregationSpec};
use crate::config::{Execution, SamplingMode};
use crate::counters::{CostCounters, CostSnapshot};
use crate::dataset::Dataset;
use crate::error::{config_invalid, Error, Result};
use crate::interval::PredictionInterval;
use crate::par;
use crate::quantile::{q_minus, q_plus};
use crate::regress::{Predictor, Regressor};
use crate::resample::draw_sample;
use crate::rng::SeededRng;

fn all_but(n: usize, skip: usize) -> Vec<usize> {
    (0..n).filter(|&j| j != skip).collect()
}

fn finite_residuals(residuals: Vec<f64>) -> Result<Vec<f64>> {
    match residuals.iter().position(|r| !r.is_finite()) {
        Some(i) => Err(Error::NumericalFailure(format!(
            "leave-one-out residual {i} is not finite"
        ))),
        None => Ok(residuals),
    }
}

/// Classic jackknife: the full-data model `mu` plus leave-one-out residuals.
#[derive(Debug, Clone)]
pub struct JackknifeFit<M> {
    full: M,
    residuals: Vec<f64>,
    counters: CostCounters,
}

/// Fits `mu` on all `n` points and `mu_{\i}` for each `i`: `n + 1` base fits.
pub fn fit_jackknife<R: Regressor>(
    data: &Dataset,
    regressor: &R,
    fit_seed: u64,
    execution: Execution,
) -> Result<JackknifeFit<R::Model>> {
    let n = data.len();
    if n < 2 {
        return Err(config_invalid(
            "the jackknife needs at least two training points",
        ));
    }
    let counters = CostCounters::default();
    let all: Vec<usize> = (0..n).collect();
    let full = regressor.fit(data, &all, fit_seed)?;
    let residuals = par::try_map_range(execution, n, |i| {
        let model = regressor.fit(data, &all_but(n, i), fit_seed)?;
        Ok::<_, Error>((data.response(i) - model.predict(data.row(i))).abs())
    })?;
    counters.add_r_calls(n as u64 + 1);
    counters.add_evals(n as u64);
    Ok(JackknifeFit {
        full,
        residuals: finite_residuals(residuals)?,
        counters,
    })
}

impl<M> JackknifeFit<M> {
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }
}

/// `mu(x) +- q+{R_i}`.
pub fn predict_jackknife<M: Predictor>(
    fit: &JackknifeFit<M>,
    x: &[f64],
    alpha: f64,
) -> Result<PredictionInterval> {
    crate::config::validate_alpha(alpha)?;
    let center = fit.full.predict(x);
    fit.counters.add_evals(1);
    let half = q_plus(&fit.residuals, alpha)?;
    PredictionInterval::new(center - half, center + half)
}

impl<M: Predictor> IntervalPredictor for JackknifeFit<M> {
    fn interval(&self, x: &[f64], alpha: f64) -> Result<PredictionInterval> {
        predict_jackknife(self, x, alpha)
    }

    fn counters(&self) -> CostSnapshot {
        self.counters.snapshot()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JplusVariant {
    /// `mu_{\i}` is one base fit on the other `n - 1` points.
    BaseLearner,
    /// `mu_{\i}` is a `b`-member ensemble fitted on resamples of the other
    /// `n - 1` points.
    EnsembleLearner { b: usize },
}

#[derive(Debug, Clone)]
enum LooModels<M> {
    Single(Vec<M>),
    Ensembles(Vec<Vec<M>>),
}

/// Jackknife+ with either a plain or an ensembled leave-one-out learner.
#[derive(Debug, Clone)]
pub struct JplusFit<M> {
    models: LooModels<M>,
    residuals: Vec<f64>,
    aggregation: AggregationSpec,
    counters: CostCounters,
}

/// Resampling settings used by the ensembled variant.
#[derive(Debug, Clone, Copy)]
struct EnsembleDraw {
    b: usize,
    m: usize,
    sampling: SamplingMode,
}

#[allow(clippy::too_many_arguments)]
pub fn fit_jplus<R: Regressor>(
    data: &Dataset,
    regressor: &R,
    variant: JplusVariant,
    m: usize,
    sampling: SamplingMode,
    aggregation: &AggregationSpec,
    rng: &mut SeededRng,
    execution: Execution,
) -> Result<JplusFit<R::Model>> {
    let n = data.len();
    if n < 2 {
        return Err(config_invalid(
            "the jackknife+ needs at least two training points",
        ));
    }
    aggregation.validate()?;
    let fit_seed = rng.next_u64();
    let counters = CostCounters::default();
    let (models, residuals) = match variant {
        JplusVariant::BaseLearner => {
            let fitted = par::try_map_range(execution, n, |i| {
                let model = regressor.fit(data, &all_but(n, i), fit_seed)?;
                let r = (data.response(i) - model.predict(data.row(i))).abs();
                Ok::<_, Error>((model, r))
            })?;
            counters.add_r_calls(n as u64);
            counters.add_evals(n as u64);
            let (models, residuals): (Vec<_>, Vec<_>) = fitted.into_iter().unzip();
            (LooModels::Single(models), residuals)
        }
        JplusVariant::EnsembleLearner { b } => {
            let draw = EnsembleDraw { b, m, sampling };
            if sampling == SamplingMode::WithoutReplacement && m > n - 1 {
                return Err(config_invalid(format!(
                    "m = {m} exceeds the leave-one-out pool of {}",
                    n - 1
                )));
            }
            // Pre-draw every resample so scheduling cannot change the result.
            let mut plans = Vec::with_capacity(n);
            for i in 0..n {
                let mut point_rng = rng.fork(i as u64);
                let pool = all_but(n, i);
                let samples = (0..draw.b)
                    .map(|_| {
                        draw_sample(n - 1, draw.m, draw.sampling, &mut point_rng)
                            .map(|s| s.indices.iter().map(|&k| pool[k]).collect::<Vec<_>>())
                    })
                    .collect::<Result<Vec<_>>>()?;
                plans.push(samples);
            }
            let fitted = par::try_map_range(execution, n, |i| {
                let members = plans[i]
                    .iter()
                    .map(|s| regressor.fit(data, s, fit_seed))
                    .collect::<Result<Vec<_>>>()?;
                let preds: Vec<f64> = members.iter().map(|m| m.predict(data.row(i))).collect();
                let r = (data.response(i) - aggregate(aggregation, &preds)).abs();
                Ok::<_, Error>((members, r))
            })?;
            counters.add_r_calls((n * b) as u64);
            counters.add_evals((n * b) as u64);
            counters.add_phi_calls(n as u64);
            let (models, residuals): (Vec<_>, Vec<_>) = fitted.into_iter().unzip();
            (LooModels::Ensembles(models), residuals)
        }
    };
    Ok(JplusFit {
        models,
        residuals: finite_residuals(residuals)?,
        aggregation: *aggregation,
        counters,
    })
}

impl<M: Predictor> JplusFit<M> {
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// `mu_{\i}(x)` for every `i`.
    pub fn loo_predictions(&self, x: &[f64]) -> Vec<f64> {
        match &self.models {
            LooModels::Single(models) => {
                self.counters.add_evals(models.len() as u64);
                models.iter().map(|m| m.predict(x)).collect()
            }
            LooModels::Ensembles(ensembles) => {
                let evals: usize = ensembles.iter().map(Vec::len).sum();
                self.counters.add_evals(evals as u64);
                self.counters.add_phi_calls(ensembles.len() as u64);
                ensembles
                    .iter()
                    .map(|members| {
                        let preds: Vec<f64> = members.iter().map(|m| m.predict(x)).collect();
                        aggregate(&self.aggregation, &preds)
                    })
                    .collect()
            }
        }
    }
}

/// `[q-{mu_{\i}(x) - R_i}, q+{mu_{\i}(x) + R_i}]`.
pub fn predict_jplus<M: Predictor>(
    fit: &JplusFit<M>,
    x: &[f64],
    alpha: f64,
) -> Result<PredictionInterval> {
    crate::config::validate_alpha(alpha)?;
    let loo = fit.loo_predictions(x);
    let lows: Vec<f64> = loo.iter().zip(&fit.residuals).map(|(m, r)| m - r).collect();
    let highs: Vec<f64> = loo.iter().zip(&fit.residuals).map(|(m, r)| m + r).collect();
    PredictionInterval::from_quantiles(q_minus(&lows, alpha)?, q_plus(&highs, alpha)?)
}

impl<M: Predictor> IntervalPredictor for JplusFit<M> {
    fn interval(&self, x: &[f64], alpha: f64) -> Result<PredictionInterval> {
        predict_jplus(self, x, alpha)
    }

    fn counters(&self) -> CostSnapshot {
        self.counters.snapshot()
    }
}
