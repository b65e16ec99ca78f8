//! Executable proof machinery.
//!
//! The lifted run fits `B~` members on resamples of the augmented `n + 1`
//! points and forms every leave-two-out residual. Filtering the lifted
//! resamples that miss the test point recovers a J+aB run on the first `n`
//! points with a Binomial `B`; [`coupling_check`] verifies that this
//! correspondence holds exactly. [`TournamentMatrix`] and [`s_alpha`]
//! expose the counting bound behind the `1 - 2 alpha` guarantee.

use crate::aggregate::{aggregate, AggregationSpec};
use crate::config::{Execution, SamplingMode};
use crate::dataset::Dataset;
use crate::error::{config_invalid, Result};
use crate::methods::{fit_jab_with_samples, LooEnsemble, LooResiduals};
use crate::par;
use crate::quantile::QuantileIndex;
use crate::regress::{Predictor, Regressor};
use crate::resample::{draw_sample, IndexSample};
use crate::rng::SeededRng;

/// Default cap on `n` for lifted runs; the pair loop costs `n^2 B~`.
pub const DEFAULT_MAX_N: usize = 64;

/// Square array of leave-two-out residuals with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualMatrix {
    size: usize,
    r: Vec<f64>,
}

impl ResidualMatrix {
    /// Validates a row-major `size x size` array.
    pub fn new(size: usize, r: Vec<f64>) -> Result<Self> {
        if r.len() != size * size {
            return Err(config_invalid(format!(
                "{} entries cannot form a {size} x {size} matrix",
                r.len()
            )));
        }
        for i in 0..size {
            for j in 0..size {
                let v = r[i * size + j];
                if !(v.is_finite() && v >= 0.0) || (i == j && v != 0.0) {
                    return Err(config_invalid(format!(
                        "residual ({i}, {j}) = {v} violates the matrix invariants"
                    )));
                }
            }
        }
        Ok(Self { size, r })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.r[i * self.size + j]
    }
}

/// `a[i][j] = 1[r[i][j] > r[j][i]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TournamentMatrix {
    size: usize,
    a: Vec<bool>,
}

impl TournamentMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.a[i * self.size + j]
    }

    pub fn row_sum(&self, i: usize) -> usize {
        self.a[i * self.size..(i + 1) * self.size]
            .iter()
            .filter(|&&v| v)
            .count()
    }

    /// Builds a tournament matrix directly; rejects pairs with both
    /// `a[i][j]` and `a[j][i]` set or a non-zero diagonal.
    pub fn from_entries(size: usize, a: Vec<bool>) -> Result<Self> {
        if a.len() != size * size {
            return Err(config_invalid(
                "tournament entries do not form a square matrix",
            ));
        }
        for i in 0..size {
            if a[i * size + i] {
                return Err(config_invalid("tournament diagonal must be zero"));
            }
            for j in 0..i {
                if a[i * size + j] && a[j * size + i] {
                    return Err(config_invalid(format!(
                        "both ({i}, {j}) and ({j}, {i}) set"
                    )));
                }
            }
        }
        Ok(Self { size, a })
    }
}

pub fn tournament(r: &ResidualMatrix) -> TournamentMatrix {
    let size = r.size;
    let mut a = vec![false; size * size];
    for i in 0..size {
        for j in 0..size {
            a[i * size + j] = i != j && r.get(i, j) > r.get(j, i);
        }
    }
    TournamentMatrix { size, a }
}

/// Rows whose sum reaches `(1 - alpha) * size`. At most `2 alpha * size`
/// such rows exist for any tournament matrix.
pub fn s_alpha(a: &TournamentMatrix, alpha: f64) -> Vec<usize> {
    let threshold = row_sum_threshold(a.size, alpha);
    (0..a.size).filter(|&i| a.row_sum(i) >= threshold).collect()
}

/// Smallest integer count `c` with `c >= (1 - alpha) * size`.
fn row_sum_threshold(size: usize, alpha: f64) -> usize {
    QuantileIndex::new(alpha, size.saturating_sub(1)).k
}

/// Outputs of one lifted run over `n + 1` points.
#[derive(Debug, Clone)]
pub struct LiftedRun<M> {
    pub residuals: ResidualMatrix,
    pub samples: Vec<IndexSample>,
    pub models: Vec<M>,
    pub fit_seed: u64,
    pub aggregation: AggregationSpec,
    /// `member_evals[b][k]`: member `b` evaluated at point `k`.
    member_evals: Vec<Vec<f64>>,
    contains: Vec<Vec<bool>>,
}

impl<M> LiftedRun<M> {
    /// `mu~_{phi \ i, j}` evaluated at point `at`.
    pub fn pair_aggregate(&self, i: usize, j: usize, at: usize) -> f64 {
        let preds: Vec<f64> = (0..self.samples.len())
            .filter(|&b| !self.contains[b][i] && !self.contains[b][j])
            .map(|b| self.member_evals[b][at])
            .collect();
        aggregate(&self.aggregation, &preds)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LiftedOptions {
    pub max_n: usize,
    pub execution: Execution,
}

impl Default for LiftedOptions {
    fn default() -> Self {
        Self {
            max_n: DEFAULT_MAX_N,
            execution: Execution::Parallel,
        }
    }
}

/// Draws `b_tilde` resamples over the augmented pool and builds the lifted
/// residual matrix.
#[allow(clippy::too_many_arguments)]
pub fn lifted_residuals<R: Regressor>(
    augmented: &Dataset,
    b_tilde: usize,
    m: usize,
    mode: SamplingMode,
    regressor: &R,
    aggregation: &AggregationSpec,
    rng: &mut SeededRng,
    options: LiftedOptions,
) -> Result<LiftedRun<R::Model>> {
    let size = augmented.len();
    let fit_seed = rng.next_u64();
    let samples = (0..b_tilde)
        .map(|_| draw_sample(size, m, mode, rng))
        .collect::<Result<Vec<_>>>()?;
    lifted_residuals_with_samples(
        augmented,
        samples,
        regressor,
        aggregation,
        fit_seed,
        options,
    )
}

pub fn lifted_residuals_with_samples<R: Regressor>(
    augmented: &Dataset,
    samples: Vec<IndexSample>,
    regressor: &R,
    aggregation: &AggregationSpec,
    fit_seed: u64,
    options: LiftedOptions,
) -> Result<LiftedRun<R::Model>> {
    let size = augmented.len();
    if size < 3 {
        return Err(config_invalid("a lifted run needs at least three points"));
    }
    if size - 1 > options.max_n {
        return Err(config_invalid(format!(
            "lifted run over n = {} exceeds the cap of {}",
            size - 1,
            options.max_n
        )));
    }
    if samples.iter().any(|s| s.indices.iter().any(|&i| i >= size)) {
        return Err(config_invalid("lifted sample index out of range"));
    }
    let models = par::try_map_range(options.execution, samples.len(), |b| {
        regressor.fit(augmented, &samples[b].indices, fit_seed)
    })?;
    let member_evals: Vec<Vec<f64>> = par::map_range(options.execution, models.len(), |b| {
        augmented.rows().map(|x| models[b].predict(x)).collect()
    });
    let contains: Vec<Vec<bool>> = samples
        .iter()
        .map(|s| {
            let mut used = vec![false; size];
            s.indices.iter().for_each(|&i| used[i] = true);
            used
        })
        .collect();

    let mut run = LiftedRun {
        residuals: ResidualMatrix {
            size,
            r: Vec::new(),
        },
        samples,
        models,
        fit_seed,
        aggregation: *aggregation,
        member_evals,
        contains,
    };
    let rows: Vec<Vec<f64>> = par::map_range(options.execution, size, |i| {
        (0..size)
            .map(|j| {
                if i == j {
                    0.0
                } else {
                    (augmented.response(i) - run.pair_aggregate(i, j, i)).abs()
                }
            })
            .collect()
    });
    run.residuals = ResidualMatrix::new(size, rows.concat())?;
    Ok(run)
}

/// Keeps the lifted resamples that miss `test_index`, in order.
pub fn couple(lifted_samples: &[IndexSample], test_index: usize) -> (usize, Vec<IndexSample>) {
    let kept: Vec<IndexSample> = lifted_samples
        .iter()
        .filter(|s| !s.contains(test_index))
        .cloned()
        .collect();
    (kept.len(), kept)
}

/// `sum_i 1[|y - mu_{phi\i}(x)| > R_i]`; a J+aB miss at `(x, y)` forces
/// this count to reach `(1 - alpha)(n + 1)`.
pub fn failure_event_count<M: Predictor>(
    ens: &LooEnsemble<M>,
    res: &LooResiduals,
    x: &[f64],
    y: f64,
) -> usize {
    ens.loo_predictions(x)
        .iter()
        .zip(res.values())
        .filter(|&(&mu, &r)| (y - mu).abs() > r)
        .count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingReport {
    pub holds: bool,
    /// Number of lifted resamples that miss the test point.
    pub b: usize,
    pub lifted_event: bool,
    pub jab_event: bool,
    pub mismatches: Vec<String>,
}

/// Runs J+aB on the first `n` points with the coupled resamples and checks
/// that its leave-one-out aggregates equal the lifted leave-two-out ones
/// bit-for-bit, and that the two failure events agree.
pub fn coupling_check<R: Regressor>(
    augmented: &Dataset,
    run: &LiftedRun<R::Model>,
    regressor: &R,
    alpha: f64,
) -> Result<CouplingReport> {
    let test = augmented.len() - 1;
    let (_, samples) = couple(&run.samples, test);
    coupling_check_with_samples(augmented, run, regressor, samples, alpha)
}

/// [`coupling_check`] with the J+aB resamples supplied by the caller.
pub fn coupling_check_with_samples<R: Regressor>(
    augmented: &Dataset,
    run: &LiftedRun<R::Model>,
    regressor: &R,
    jab_samples: Vec<IndexSample>,
    alpha: f64,
) -> Result<CouplingReport> {
    crate::config::validate_alpha(alpha)?;
    let n = augmented.len() - 1;
    let train_idx: Vec<usize> = (0..n).collect();
    let train = augmented.select(&train_idx);
    let x_test = augmented.row(n);
    let y_test = augmented.response(n);
    let b = jab_samples.len();
    let (ens, res) = fit_jab_with_samples(
        &train,
        regressor,
        &run.aggregation,
        jab_samples,
        run.fit_seed,
        Execution::Sequential,
    )?;

    let mut mismatches = Vec::new();
    let at_test = ens.loo_predictions(x_test);
    for (i, &mu_test) in at_test.iter().enumerate() {
        let lifted_train = run.pair_aggregate(n, i, i);
        if lifted_train.to_bits() != ens.loo_at_train()[i].to_bits() {
            mismatches.push(format!(
                "point {i}: lifted aggregate {lifted_train} vs J+aB {} at X_i",
                ens.loo_at_train()[i]
            ));
        }
        let lifted_test = run.pair_aggregate(n, i, n);
        if lifted_test.to_bits() != mu_test.to_bits() {
            mismatches.push(format!(
                "point {i}: lifted aggregate {lifted_test} vs J+aB {mu_test} at the test point"
            ));
        }
        if run.residuals.get(i, n).to_bits() != res.values()[i].to_bits() {
            mismatches.push(format!("point {i}: residual mismatch"));
        }
    }

    let threshold = QuantileIndex::new(alpha, n).k;
    let lifted_event = tournament(&run.residuals).row_sum(n) >= threshold;
    let jab_count = at_test
        .iter()
        .zip(res.values())
        .filter(|&(&mu, &r)| (y_test - mu).abs() > r)
        .count();
    let jab_event = jab_count >= threshold;
    if lifted_event != jab_event {
        mismatches.push(format!(
            "failure events differ: lifted {lifted_event}, J+aB {jab_event}"
        ));
    }
    Ok(CouplingReport {
        holds: mismatches.is_empty(),
        b,
        lifted_event,
        jab_event,
        mismatches,
    })
}

/// Random residual matrix; with probability `tie_prob` an off-diagonal pair
/// is made symmetric.
pub fn random_residual_matrix(size: usize, tie_prob: f64, rng: &mut SeededRng) -> ResidualMatrix {
    let mut r = vec![0.0; size * size];
    for i in 0..size {
        for j in 0..i {
            let a = rng.uniform();
            let b = if rng.uniform() < tie_prob {
                a
            } else {
                rng.uniform()
            };
            r[i * size + j] = a;
            r[j * size + i] = b;
        }
    }
    ResidualMatrix { size, r }
}

/// Sort-and-index quantile with the rank computed in exact integer
/// arithmetic. `alpha` is first replaced by the simplest fraction within
/// `1e-12` of it, so `0.1` and `1/3` are treated as `1/10` and `1/3`.
/// Independent of [`crate::quantile::q_plus`].
pub fn q_plus_oracle(values: &[f64], alpha: f64) -> f64 {
    let (p, q) = simplest_fraction(alpha, 1e-12);
    let n = values.len() as u128;
    let k = ((q - p) * (n + 1)).div_ceil(q);
    if k > n {
        return f64::INFINITY;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("finite values"));
    sorted[(k.max(1) - 1) as usize]
}

/// First continued-fraction convergent `p / q` of `x` in `(0, 1)` with
/// `|x - p/q| <= tol`.
fn simplest_fraction(x: f64, tol: f64) -> (u128, u128) {
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        let (p2, q2) = (a as u128 * p1 + p0, a as u128 * q1 + q0);
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = rest - a;
        if (x - p1 as f64 / q1 as f64).abs() <= tol || frac == 0.0 {
            break;
        }
        rest = 1.0 / frac;
    }
    (p1, q1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::reference::{MeanResponse, ZeroModel};

    fn points(ys: &[f64]) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..ys.len()).map(|i| vec![i as f64]).collect();
        Dataset::from_rows(&rows, ys.to_vec()).unwrap()
    }

    #[test]
    fn zero_learner_residuals_are_abs_responses() {
        let d = points(&[1.0, -2.0, 3.5, 0.25]);
        let run = lifted_residuals(
            &d,
            6,
            2,
            SamplingMode::WithReplacement,
            &ZeroModel,
            &AggregationSpec::mean(),
            &mut SeededRng::new(1, 2),
            LiftedOptions::default(),
        )
        .unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 0.0 } else { d.response(i).abs() };
                assert_eq!(run.residuals.get(i, j), want);
            }
        }
    }

    #[test]
    fn injected_member_only_serves_pairs_it_misses() {
        let d = points(&[0.0, 3.0, 7.0, -1.0]);
        let samples = vec![IndexSample::new(
            vec![0, 1],
            SamplingMode::WithoutReplacement,
        )];
        let run = lifted_residuals_with_samples(
            &d,
            samples,
            &MeanResponse,
            &AggregationSpec::mean(),
            0,
            LiftedOptions::default(),
        )
        .unwrap();
        // Only the pair {2, 3} is missed by the member (mean 1.5).
        assert_eq!(run.residuals.get(2, 3), 5.5);
        assert_eq!(run.residuals.get(3, 2), 2.5);
        // Any pair touching 0 or 1 falls back to the empty default.
        assert_eq!(run.residuals.get(2, 0), 7.0);
        assert_eq!(run.residuals.get(2, 1), 7.0);
        assert_eq!(run.residuals.get(1, 3), 3.0);
        assert_eq!(run.residuals.get(0, 1), 0.0);
    }

    #[test]
    fn three_points_one_member_all_cells_empty() {
        let d = points(&[0.0, 3.0, 7.0]);
        let samples = vec![IndexSample::new(
            vec![0, 1],
            SamplingMode::WithoutReplacement,
        )];
        let run = lifted_residuals_with_samples(
            &d,
            samples,
            &MeanResponse,
            &AggregationSpec::mean(),
            0,
            LiftedOptions::default(),
        )
        .unwrap();
        for i in 0..3 {
            for j in (0..3).filter(|&j| j != i) {
                assert_eq!(run.residuals.get(i, j), d.response(i).abs());
            }
        }
    }

    #[test]
    fn symmetric_residuals_give_empty_tournament() {
        let r = ResidualMatrix::new(3, vec![0.0, 1.0, 2.0, 1.0, 0.0, 3.0, 2.0, 3.0, 0.0]).unwrap();
        let a = tournament(&r);
        assert!((0..3).all(|i| a.row_sum(i) == 0));
        assert!(s_alpha(&a, 0.1).is_empty());
    }

    #[test]
    fn direct_comparison() {
        let r = ResidualMatrix::new(2, vec![0.0, 2.0, 1.0, 0.0]).unwrap();
        let a = tournament(&r);
        assert!(a.get(0, 1));
        assert!(!a.get(1, 0));
    }

    #[test]
    fn s_alpha_threshold_arithmetic() {
        let size = 5;
        let mut entries = vec![false; size * size];
        entries[1..size].fill(true);
        let a = TournamentMatrix::from_entries(size, entries).unwrap();
        let s = s_alpha(&a, 0.2);
        assert_eq!(s, vec![0]);
        assert!(s.len() as f64 <= 2.0 * 0.2 * size as f64);
    }

    #[test]
    fn invalid_matrices() {
        assert!(ResidualMatrix::new(2, vec![1.0, 0.0, 0.0, 0.0]).is_err());
        assert!(ResidualMatrix::new(2, vec![0.0, -1.0, 0.0, 0.0]).is_err());
        assert!(TournamentMatrix::from_entries(2, vec![false, true, true, false]).is_err());
    }

    #[test]
    fn couple_filters() {
        let s = |v: Vec<usize>| IndexSample::new(v, SamplingMode::WithReplacement);
        let lifted = vec![s(vec![0, 1]), s(vec![3, 0]), s(vec![2, 2])];
        let (b, kept) = couple(&lifted, 3);
        assert_eq!(b, 2);
        assert_eq!(kept, vec![s(vec![0, 1]), s(vec![2, 2])]);
        let (b, kept) = couple(&lifted[..1], 3);
        assert_eq!((b, kept.len()), (1, 1));
        let (b, kept) = couple(&lifted[1..2], 3);
        assert_eq!((b, kept.len()), (0, 0));
    }

    #[test]
    fn oracle_quantile_index() {
        let v: Vec<f64> = (1..=9).map(f64::from).collect();
        assert_eq!(q_plus_oracle(&v, 0.1), 9.0);
        assert_eq!(q_plus_oracle(&v[..3], 0.5), 2.0);
        assert_eq!(q_plus_oracle(&[1.0; 10], 0.05), f64::INFINITY);
    }

    #[test]
    fn lifted_cap() {
        let d = points(&[0.0; 6]);
        let err = lifted_residuals(
            &d,
            2,
            2,
            SamplingMode::WithReplacement,
            &ZeroModel,
            &AggregationSpec::mean(),
            &mut SeededRng::new(0, 0),
            LiftedOptions {
                max_n: 4,
                execution: Execution::Sequential,
            },
        );
        assert!(err.is_err());
    }
}
