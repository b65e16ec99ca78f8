//! Inflated intervals and ensemble-stability bounds for fixed `B`.

use serde::{Deserialize, Serialize};

use crate::config::MethodConfig;
use crate::dataset::Dataset;
use crate::error::{config_invalid, Result};
use crate::interval::PredictionInterval;
use crate::regress::Regressor;
use crate::rng::SeededRng;

use super::jab::fit_jab;

/// `(epsilon, delta)` ensemble stability and `(epsilon*, delta*)`
/// out-of-sample stability of the averaged ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityParams {
    pub epsilon: f64,
    pub delta: f64,
    pub epsilon_star: f64,
    pub delta_star: f64,
}

impl StabilityParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        if !(self.epsilon >= 0.0 && self.epsilon_star >= 0.0) {
            return Err(config_invalid("stability epsilons must be non-negative"));
        }
        if !(unit(self.delta) && unit(self.delta_star)) {
            return Err(config_invalid("stability deltas must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Widens both ends by `epsilon_total`.
pub fn inflate(interval: &PredictionInterval, epsilon_total: f64) -> Result<PredictionInterval> {
    if !(epsilon_total >= 0.0) {
        return Err(config_invalid(format!(
            "inflation must be non-negative, got {epsilon_total}"
        )));
    }
    PredictionInterval::new(
        interval.lower - epsilon_total,
        interval.upper + epsilon_total,
    )
}

/// `delta` for which mean aggregation over `B` members of a learner
/// bounded in `[lower, upper]` is `(epsilon, delta)`-stable:
///
/// `2 exp(-2 sqrt(B) theta eps^2 / (u - l)^2) + exp(-(sqrt(B) - 1)^2 theta^2 / 2)`.
///
/// The value can exceed 1, in which case the bound is vacuous.
pub fn stability_delta(b: usize, theta: f64, epsilon: f64, lower: f64, upper: f64) -> Result<f64> {
    if b == 0 {
        return Err(config_invalid("B must be at least 1"));
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(config_invalid(format!(
            "theta must lie in (0, 1], got {theta}"
        )));
    }
    if !(epsilon > 0.0) {
        return Err(config_invalid("epsilon must be positive"));
    }
    if !(upper > lower) || !lower.is_finite() || !upper.is_finite() {
        return Err(config_invalid(
            "the output range needs finite lower < upper",
        ));
    }
    let root_b = (b as f64).sqrt();
    let range = upper - lower;
    let concentration = 2.0 * (-2.0 * root_b * theta * epsilon * epsilon / (range * range)).exp();
    let count_tail = (-(root_b - 1.0).powi(2) * theta * theta / 2.0).exp();
    Ok(concentration + count_tail)
}

/// Coverage level `1 - 2 alpha - 4 sqrt(delta)` of the `2 epsilon`-inflated
/// interval.
pub fn theorem_s2_level(alpha: f64, delta: f64) -> f64 {
    1.0 - 2.0 * alpha - 4.0 * delta.sqrt()
}

/// Coverage level `1 - alpha - 3 sqrt(delta) - 4 sqrt(delta*)` of the
/// `(2 epsilon + 2 epsilon*)`-inflated interval.
pub fn theorem_s3_level(alpha: f64, delta: f64, delta_star: f64) -> f64 {
    1.0 - alpha - 3.0 * delta.sqrt() - 4.0 * delta_star.sqrt()
}

/// Monte Carlo check of ensemble stability on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityEstimate {
    pub epsilon: f64,
    pub replications: usize,
    /// Largest, over training points, fraction of replications in which
    /// `mu_{phi\i}(X_i)` strayed more than `epsilon` from its average.
    pub delta_hat: f64,
}

/// Refits J+aB `replications` times on fresh resamples of the same data and
/// reports how often each out-of-bag aggregate at its own point leaves an
/// `epsilon` band around the across-replication mean. The mean stands in for
/// the resampling expectation.
pub fn estimate_ensemble_stability<R: Regressor>(
    data: &Dataset,
    regressor: &R,
    config: &MethodConfig,
    epsilon: f64,
    replications: usize,
    rng: &SeededRng,
) -> Result<StabilityEstimate> {
    if replications < 2 {
        return Err(config_invalid("need at least two replications"));
    }
    if !(epsilon >= 0.0) {
        return Err(config_invalid("epsilon must be non-negative"));
    }
    let runs = (0..replications)
        .map(|r| {
            let mut stream = rng.fork(r as u64);
            fit_jab(data, regressor, config, &mut stream).map(|(e, _)| e.loo_at_train().to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    let n = data.len();
    let mut delta_hat: f64 = 0.0;
    for i in 0..n {
        let mean = runs.iter().map(|v| v[i]).sum::<f64>() / replications as f64;
        let misses = runs
            .iter()
            .filter(|v| (v[i] - mean).abs() > epsilon)
            .count();
        delta_hat = delta_hat.max(misses as f64 / replications as f64);
    }
    Ok(StabilityEstimate {
        epsilon,
        replications,
        delta_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inflation() {
        let iv = PredictionInterval::new(-3.0, 9.0).unwrap();
        assert_eq!(inflate(&iv, 0.0).unwrap(), iv);
        assert_eq!(
            inflate(&iv, 2.0).unwrap(),
            PredictionInterval::new(-5.0, 11.0).unwrap()
        );
        let all = PredictionInterval::unbounded();
        assert_eq!(inflate(&all, 1.0).unwrap(), all);
        assert!(inflate(&iv, -1.0).is_err());
    }

    #[test]
    fn single_member_is_vacuous() {
        assert!(stability_delta(1, 0.3, 0.5, 0.0, 1.0).unwrap() >= 1.0);
    }

    #[test]
    fn large_epsilon_leaves_count_tail() {
        let d = stability_delta(400, 0.5, 1e6, 0.0, 1.0).unwrap();
        let tail = (-(19.0f64).powi(2) * 0.25 / 2.0).exp();
        assert!((d - tail).abs() <= 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(stability_delta(0, 0.5, 0.1, 0.0, 1.0).is_err());
        assert!(stability_delta(10, 0.0, 0.1, 0.0, 1.0).is_err());
        assert!(stability_delta(10, 0.5, 0.0, 0.0, 1.0).is_err());
        assert!(stability_delta(10, 0.5, 0.1, 1.0, 1.0).is_err());
    }
}
