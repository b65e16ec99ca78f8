//! Randomized checks of the proof-level invariants.

use serde::{Deserialize, Serialize};

use crate::aggregate::AggregationSpec;
use crate::config::{Execution, SamplingMode};
use crate::dataset::Dataset;
use crate::error::Result;
use crate::oracle::{
    coupling_check, lifted_residuals, q_plus_oracle, random_residual_matrix, s_alpha, tournament,
    LiftedOptions,
};
use crate::quantile::{q_minus, q_plus};
use crate::regress::RegressorSpec;
use crate::rng::SeededRng;

const MAX_DETAILS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    /// The first few violations, described.
    pub details: Vec<String>,
}

impl CheckResult {
    fn new(name: &str, trials: usize) -> Self {
        Self {
            name: name.to_string(),
            trials,
            violations: 0,
            details: Vec::new(),
        }
    }

    fn record(&mut self, detail: impl FnOnce() -> String) {
        self.violations += 1;
        if self.details.len() < MAX_DETAILS {
            self.details.push(detail());
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub tournaments: usize,
    pub coupling_runs: usize,
    pub quantile_instances: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tournaments: 100_000,
            coupling_runs: 200,
            quantile_instances: 10_000,
            seed: 0,
        }
    }
}

pub const TOURNAMENT_ALPHAS: [f64; 3] = [0.05, 0.1, 0.3];

/// `|S_alpha(A)| <= 2 alpha (n + 1)` on random tournaments of size 2 to 30,
/// half of them with tied residual pairs.
pub fn check_tournament_bound(trials: usize, seed: u64) -> CheckResult {
    let mut result = CheckResult::new("tournament bound", trials);
    for t in 0..trials {
        let mut rng = SeededRng::derive(seed, &[1, t as u64]);
        let size = 2 + rng.below(29);
        let alpha = TOURNAMENT_ALPHAS[t % TOURNAMENT_ALPHAS.len()];
        let tie_prob = if t % 2 == 0 { 0.0 } else { 0.3 };
        let a = tournament(&random_residual_matrix(size, tie_prob, &mut rng));
        let count = s_alpha(&a, alpha).len();
        if count as f64 > 2.0 * alpha * size as f64 {
            result.record(|| format!("trial {t}: |S| = {count}, n + 1 = {size}, alpha = {alpha}"));
        }
    }
    result
}

/// The regressor used by coupling trial `t`; trials cycle through all four.
pub fn coupling_regressor(t: usize) -> RegressorSpec {
    match t % 4 {
        0 => RegressorSpec::ridge(),
        1 => RegressorSpec::Knn { k: 3 },
        2 => RegressorSpec::Tree {
            max_depth: 3,
            min_leaf: 1,
        },
        _ => RegressorSpec::Forest {
            n_trees: 4,
            max_depth: 3,
            min_leaf: 1,
            feature_subsample: 0.5,
        },
    }
}

/// The aggregation used by coupling trial `t`.
pub fn coupling_aggregation(t: usize) -> AggregationSpec {
    match (t / 4) % 3 {
        0 => AggregationSpec::mean(),
        1 => AggregationSpec::median(),
        _ => AggregationSpec::trimmed_mean(0.2),
    }
}

/// Sampling mode of coupling trial `t`.
pub fn coupling_sampling(t: usize) -> SamplingMode {
    if (t / 12).is_multiple_of(2) {
        SamplingMode::WithReplacement
    } else {
        SamplingMode::WithoutReplacement
    }
}

fn random_dataset(n: usize, p: usize, rng: &mut SeededRng) -> Dataset {
    let features = (0..n * p).map(|_| rng.uniform() * 4.0 - 2.0).collect();
    let responses = (0..n).map(|_| rng.uniform() * 10.0 - 5.0).collect();
    Dataset::new(features, p, responses).expect("finite random data")
}

/// One coupling trial: lifted run on `n + 1` points, then J+aB on the first
/// `n` with the resamples that miss the last point.
pub fn coupling_trial(t: usize, seed: u64) -> Result<crate::oracle::CouplingReport> {
    let mut rng = SeededRng::derive(seed, &[2, t as u64]);
    let n = 4 + rng.below(13);
    let b_tilde = 1 + rng.below(40);
    let m = 1 + rng.below(n);
    let alpha = [0.1, 0.2, 0.3][rng.below(3)];
    let augmented = random_dataset(n + 1, 2, &mut rng);
    let regressor = coupling_regressor(t);
    let run = lifted_residuals(
        &augmented,
        b_tilde,
        m,
        coupling_sampling(t),
        &regressor,
        &coupling_aggregation(t),
        &mut rng,
        LiftedOptions {
            execution: Execution::Sequential,
            ..LiftedOptions::default()
        },
    )?;
    coupling_check(&augmented, &run, &regressor, alpha)
}

/// Coupling identity over `runs` trials spanning regressors, aggregations
/// and sampling modes, with `n` in 4..=16 and `b_tilde` in 1..=40.
pub fn check_coupling(runs: usize, seed: u64) -> CheckResult {
    let mut result = CheckResult::new("coupling identity", runs);
    for t in 0..runs {
        match coupling_trial(t, seed) {
            Ok(report) if report.holds => {}
            Ok(report) => result.record(|| format!("trial {t}: {}", report.mismatches.join("; "))),
            Err(e) => result.record(|| format!("trial {t}: {e}")),
        }
    }
    result
}

/// Random quantile instance `t`: length 1 to 30, values on a coarse grid
/// half the time so ties occur, `alpha` a multiple of 1e-4 or a value from
/// a list of awkward ones.
pub fn quantile_instance(t: usize, seed: u64) -> (Vec<f64>, f64) {
    const AWKWARD: [f64; 6] = [0.1, 0.05, 0.2, 0.3, 0.7, 1.0 / 3.0];
    let mut rng = SeededRng::derive(seed, &[3, t as u64]);
    let n = 1 + rng.below(30);
    let coarse = rng.below(2) == 0;
    let values = (0..n)
        .map(|_| {
            let v = rng.uniform() * 20.0 - 10.0;
            if coarse {
                v.round()
            } else {
                v
            }
        })
        .collect();
    let alpha = if rng.below(2) == 0 {
        AWKWARD[rng.below(AWKWARD.len())]
    } else {
        (1 + rng.below(9_999)) as f64 / 1e4
    };
    (values, alpha)
}

/// `q_plus` and `q_minus` against the integer-rank oracle.
pub fn check_quantile_oracle(instances: usize, seed: u64) -> CheckResult {
    let mut result = CheckResult::new("quantile oracle", instances);
    for t in 0..instances {
        let (values, alpha) = quantile_instance(t, seed);
        let negated: Vec<f64> = values.iter().map(|v| -v).collect();
        let plus = q_plus(&values, alpha).ok();
        let minus = q_minus(&values, alpha).ok();
        let want_plus = q_plus_oracle(&values, alpha);
        let want_minus = -q_plus_oracle(&negated, alpha);
        let same = |got: Option<f64>, want: f64| got == Some(want);
        if !same(plus, want_plus) || !same(minus, want_minus) {
            result.record(|| {
                format!(
                    "instance {t}: n = {}, alpha = {alpha}: got ({plus:?}, {minus:?}), \
                     oracle ({want_plus}, {want_minus})",
                    values.len()
                )
            });
        }
    }
    result
}

pub fn run_verify(options: &VerifyOptions) -> Vec<CheckResult> {
    vec![
        check_tournament_bound(options.tournaments, options.seed),
        check_coupling(options.coupling_runs, options.seed),
        check_quantile_oracle(options.quantile_instances, options.seed),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let opts = VerifyOptions {
            tournaments: 2_000,
            coupling_runs: 24,
            quantile_instances: 10_000,
            seed: 3,
        };
        for check in run_verify(&opts) {
            assert!(check.passed(), "{check:?}");
        }
    }
}
