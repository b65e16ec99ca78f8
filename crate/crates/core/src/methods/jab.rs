use log::warn;

use super::IntervalPredictor;
use crate::aggregate::{aggregate, AggregationSpec};
use crate::config::{BMode, Execution, MethodConfig};
use crate::counters::{CostCounters, CostSnapshot};
use crate::dataset::Dataset;
use crate::error::{config_invalid, Error, Result};
use crate::interval::PredictionInterval;
use crate::par;
use crate::quantile::{q_minus, q_plus};
use crate::regress::{Predictor, Regressor};
use crate::resample::{draw_b, draw_sample, keep_probability, IndexSample};
use crate::rng::SeededRng;

/// `B` fitted members with, for every training point, the members whose
/// resample left that point out.
#[derive(Debug, Clone)]
pub struct LooEnsemble<M> {
    models: Vec<M>,
    samples: Vec<IndexSample>,
    out_of_bag: Vec<Vec<usize>>,
    loo_at_train: Vec<f64>,
    aggregation: AggregationSpec,
    execution: Execution,
    counters: CostCounters,
}

/// `R_i = |Y_i - mu_{phi \ i}(X_i)|` for each training point.
#[derive(Debug, Clone, PartialEq)]
pub struct LooResiduals(Vec<f64>);

impl LooResiduals {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<M: Predictor> LooEnsemble<M> {
    pub fn n_members(&self) -> usize {
        self.models.len()
    }

    pub fn n_train(&self) -> usize {
        self.out_of_bag.len()
    }

    pub fn models(&self) -> &[M] {
        &self.models
    }

    pub fn samples(&self) -> &[IndexSample] {
        &self.samples
    }

    /// Members whose resample excludes training point `i`.
    pub fn out_of_bag(&self, i: usize) -> &[usize] {
        &self.out_of_bag[i]
    }

    /// `mu_{phi \ i}(X_i)`, cached at fit time.
    pub fn loo_at_train(&self) -> &[f64] {
        &self.loo_at_train
    }

    pub fn aggregation(&self) -> &AggregationSpec {
        &self.aggregation
    }

    /// `mu_{phi \ i}(x)` for every training point `i`.
    ///
    /// Evaluates each member once at `x` and aggregates the out-of-bag
    /// subsets: `B` evaluations and `n` aggregations.
    pub fn loo_predictions(&self, x: &[f64]) -> Vec<f64> {
        let member: Vec<f64> = self.models.iter().map(|m| m.predict(x)).collect();
        self.counters.add_evals(member.len() as u64);
        self.counters.add_phi_calls(self.out_of_bag.len() as u64);
        let mut buf = Vec::new();
        self.out_of_bag
            .iter()
            .map(|oob| {
                buf.clear();
                buf.extend(oob.iter().map(|&b| member[b]));
                aggregate(&self.aggregation, &buf)
            })
            .collect()
    }

    pub fn counters(&self) -> CostSnapshot {
        self.counters.snapshot()
    }
}

/// Ensemble size for one fit: the fixed `B`, or a Binomial draw with the
/// lifted keep-probability.
pub fn resolve_b(n: usize, config: &MethodConfig, rng: &mut SeededRng) -> Result<usize> {
    match config.b_mode {
        BMode::Fixed(b) => Ok(b),
        BMode::Random(b_tilde) => {
            let theta = keep_probability(n, config.m, config.sampling)?;
            draw_b(b_tilde, theta, rng)
        }
    }
}

/// Draws the fit seed, `B`, and the `B` resamples, in that order.
pub fn draw_jab_samples(
    n: usize,
    config: &MethodConfig,
    rng: &mut SeededRng,
) -> Result<(Vec<IndexSample>, u64)> {
    config.validate_for(n)?;
    let fit_seed = rng.next_u64();
    let b = resolve_b(n, config, rng)?;
    let samples = (0..b)
        .map(|_| draw_sample(n, config.m, config.sampling, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok((samples, fit_seed))
}

/// Fits J+aB: resamples drawn from `rng`, one base fit per resample.
pub fn fit_jab<R: Regressor>(
    data: &Dataset,
    regressor: &R,
    config: &MethodConfig,
    rng: &mut SeededRng,
) -> Result<(LooEnsemble<R::Model>, LooResiduals)> {
    let (samples, fit_seed) = draw_jab_samples(data.len(), config, rng)?;
    fit_jab_with_samples(
        data,
        regressor,
        &config.aggregation,
        samples,
        fit_seed,
        config.execution,
    )
}

/// Fits J+aB on caller-supplied resamples.
///
/// Every member is evaluated at every training point (`B n` evaluations)
/// and each out-of-bag aggregate is formed once (`n` aggregations).
pub fn fit_jab_with_samples<R: Regressor>(
    data: &Dataset,
    regressor: &R,
    aggregation: &AggregationSpec,
    samples: Vec<IndexSample>,
    fit_seed: u64,
    execution: Execution,
) -> Result<(LooEnsemble<R::Model>, LooResiduals)> {
    let n = data.len();
    if n == 0 {
        return Err(Error::EmptyInput("training set"));
    }
    aggregation.validate()?;
    if let Some(bad) = samples
        .iter()
        .flat_map(|s| s.indices.iter())
        .find(|&&i| i >= n)
    {
        return Err(config_invalid(format!(
            "sample index {bad} out of range for n = {n}"
        )));
    }
    let counters = CostCounters::default();
    let models = par::try_map_range(execution, samples.len(), |b| {
        regressor.fit(data, &samples[b].indices, fit_seed)
    })?;
    counters.add_r_calls(models.len() as u64);

    let mut out_of_bag = vec![Vec::new(); n];
    for (b, sample) in samples.iter().enumerate() {
        let mut used = vec![false; n];
        for &i in &sample.indices {
            used[i] = true;
        }
        for (i, list) in out_of_bag.iter_mut().enumerate() {
            if !used[i] {
                list.push(b);
            }
        }
    }
    let empty = out_of_bag.iter().filter(|l| l.is_empty()).count();
    if empty > 0 {
        warn!(
            "{empty} of {n} training points appear in every resample (B = {}); \
             their leave-one-out aggregate falls back to the empty default",
            samples.len()
        );
    }

    // Row b holds member b evaluated at every training point.
    let evals: Vec<Vec<f64>> = par::map_range(execution, models.len(), |b| {
        data.rows().map(|x| models[b].predict(x)).collect()
    });
    counters.add_evals((models.len() * n) as u64);

    let loo_at_train: Vec<f64> = out_of_bag
        .iter()
        .enumerate()
        .map(|(i, oob)| {
            let preds: Vec<f64> = oob.iter().map(|&b| evals[b][i]).collect();
            aggregate(aggregation, &preds)
        })
        .collect();
    counters.add_phi_calls(n as u64);

    let residuals: Vec<f64> = loo_at_train
        .iter()
        .zip(data.responses())
        .map(|(mu, y)| (y - mu).abs())
        .collect();
    if let Some(i) = residuals.iter().position(|r| !r.is_finite()) {
        return Err(Error::NumericalFailure(format!(
            "leave-one-out residual {i} is not finite"
        )));
    }

    Ok((
        LooEnsemble {
            models,
            samples,
            out_of_bag,
            loo_at_train,
            aggregation: *aggregation,
            execution,
            counters,
        },
        LooResiduals(residuals),
    ))
}

fn check_alpha_and_len<M>(ens: &LooEnsemble<M>, res: &LooResiduals, alpha: f64) -> Result<()> {
    crate::config::validate_alpha(alpha)?;
    if res.len() != ens.out_of_bag.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} residuals for an ensemble over {} training points",
            res.len(),
            ens.out_of_bag.len()
        )));
    }
    Ok(())
}

/// `[q-{mu_{phi\i}(x) - R_i}, q+{mu_{phi\i}(x) + R_i}]`.
pub fn predict_jab<M: Predictor>(
    ens: &LooEnsemble<M>,
    res: &LooResiduals,
    x: &[f64],
    alpha: f64,
) -> Result<PredictionInterval> {
    check_alpha_and_len(ens, res, alpha)?;
    let loo = ens.loo_predictions(x);
    let lows: Vec<f64> = loo.iter().zip(&res.0).map(|(m, r)| m - r).collect();
    let highs: Vec<f64> = loo.iter().zip(&res.0).map(|(m, r)| m + r).collect();
    PredictionInterval::from_quantiles(q_minus(&lows, alpha)?, q_plus(&highs, alpha)?)
}

/// Jackknife-minmax-after-bootstrap:
/// `[min_i mu_{phi\i}(x) - q+{R_i}, max_i mu_{phi\i}(x) + q+{R_i}]`.
///
/// Always contains the J+aB interval. Very conservative; not recommended
/// for practical use.
pub fn predict_jmm_ab<M: Predictor>(
    ens: &LooEnsemble<M>,
    res: &LooResiduals,
    x: &[f64],
    alpha: f64,
) -> Result<PredictionInterval> {
    check_alpha_and_len(ens, res, alpha)?;
    let loo = ens.loo_predictions(x);
    let lo = loo.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = loo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let half = q_plus(&res.0, alpha)?;
    PredictionInterval::new(lo - half, hi + half)
}

/// Fitted J+aB with its residuals; `minmax` switches to the minmax interval.
#[derive(Debug, Clone)]
pub struct JabPredictor<M> {
    pub ensemble: LooEnsemble<M>,
    pub residuals: LooResiduals,
    pub minmax: bool,
}

impl<M: Predictor> IntervalPredictor for JabPredictor<M> {
    fn interval(&self, x: &[f64], alpha: f64) -> Result<PredictionInterval> {
        if self.minmax {
            predict_jmm_ab(&self.ensemble, &self.residuals, x, alpha)
        } else {
            predict_jab(&self.ensemble, &self.residuals, x, alpha)
        }
    }

    fn counters(&self) -> CostSnapshot {
        self.ensemble.counters()
    }
}

impl<M> LooEnsemble<M> {
    pub fn execution(&self) -> Execution {
        self.execution
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SamplingMode;
    use crate::regress::reference::MeanResponse;

    fn three_points() -> Dataset {
        Dataset::from_rows(&[vec![0.0], vec![1.0], vec![2.0]], vec![0.0, 3.0, 6.0]).unwrap()
    }

    fn injected() -> Vec<IndexSample> {
        vec![
            IndexSample::new(vec![0, 1], SamplingMode::WithoutReplacement),
            IndexSample::new(vec![1, 2], SamplingMode::WithoutReplacement),
        ]
    }

    #[test]
    fn hand_trace_residuals() {
        let (ens, res) = fit_jab_with_samples(
            &three_points(),
            &MeanResponse,
            &AggregationSpec::mean(),
            injected(),
            0,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(ens.loo_at_train(), &[4.5, 0.0, 1.5]);
        assert_eq!(res.values(), &[4.5, 3.0, 4.5]);
        let iv = predict_jab(&ens, &res, &[0.7], 0.4).unwrap();
        assert_eq!((iv.lower, iv.upper), (-3.0, 9.0));
    }

    #[test]
    fn zero_members_use_empty_default() {
        let d = Dataset::from_rows(
            &[vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            vec![1.0, -2.0, 3.0, -4.0],
        )
        .unwrap();
        let (ens, res) = fit_jab_with_samples(
            &d,
            &MeanResponse,
            &AggregationSpec::mean(),
            vec![],
            0,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(res.values(), &[1.0, 2.0, 3.0, 4.0]);
        let iv = predict_jab(&ens, &res, &[0.0], 0.5).unwrap();
        assert_eq!((iv.lower, iv.upper), (-3.0, 3.0));
        let wide = predict_jab(&ens, &res, &[0.0], 0.1).unwrap();
        assert_eq!(wide, PredictionInterval::unbounded());
    }

    #[test]
    fn minmax_contains_hand_trace() {
        let (ens, res) = fit_jab_with_samples(
            &three_points(),
            &MeanResponse,
            &AggregationSpec::mean(),
            injected(),
            0,
            Execution::Sequential,
        )
        .unwrap();
        let mm = predict_jmm_ab(&ens, &res, &[0.0], 0.4).unwrap();
        // min aggregate 0 and max 4.5, q+{4.5, 3, 4.5} = 4.5.
        assert_eq!((mm.lower, mm.upper), (-4.5, 9.0));
        let jab = predict_jab(&ens, &res, &[0.0], 0.4).unwrap();
        assert!(mm.contains_interval(&jab));
    }

    #[test]
    fn counts_one_fit_per_member() {
        let (ens, _) = fit_jab_with_samples(
            &three_points(),
            &MeanResponse,
            &AggregationSpec::mean(),
            injected(),
            0,
            Execution::Sequential,
        )
        .unwrap();
        let c = ens.counters();
        assert_eq!((c.r_calls, c.evals, c.phi_calls), (2, 6, 3));
    }

    #[test]
    fn out_of_range_sample_rejected() {
        let bad = vec![IndexSample::new(vec![0, 5], SamplingMode::WithReplacement)];
        let err = fit_jab_with_samples(
            &three_points(),
            &MeanResponse,
            &AggregationSpec::mean(),
            bad,
            0,
            Execution::Sequential,
        );
        assert!(err.is_err());
    }
}
