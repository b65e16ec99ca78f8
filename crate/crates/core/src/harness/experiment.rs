use log::{info, warn};

use crate::config::{MethodConfig, SamplingMode};
use crate::counters::CostSnapshot;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::interval::PredictionInterval;
use crate::methods::{theorem_s2_level, theorem_s3_level};
use crate::par;
use crate::resample::draw_sample;
use crate::rng::SeededRng;

use super::csv_data::NumericTable;
use super::plan::{fit_method, DataSource, ExperimentPlan, MethodKind};
use super::report::{Annotations, MethodResult, RunReport, SplitResult};

const DATA_STREAM: u64 = 1;
const METHOD_STREAM: u64 = 2;

/// Fraction of `truths` inside their interval, endpoints included.
pub fn coverage(intervals: &[PredictionInterval], truths: &[f64]) -> Result<f64> {
    if intervals.len() != truths.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} intervals for {} responses",
            intervals.len(),
            truths.len()
        )));
    }
    if truths.is_empty() {
        return Err(Error::EmptyInput("coverage needs at least one test point"));
    }
    let hits = intervals
        .iter()
        .zip(truths)
        .filter(|(iv, &y)| iv.contains(y))
        .count();
    Ok(hits as f64 / truths.len() as f64)
}

/// Mean of the finite widths and the number of infinite ones.
pub fn width_summary(intervals: &[PredictionInterval]) -> (Option<f64>, usize) {
    let finite: Vec<f64> = intervals
        .iter()
        .map(PredictionInterval::width)
        .filter(|w| w.is_finite())
        .collect();
    let infinite = intervals.len() - finite.len();
    let mean = (!finite.is_empty()).then(|| finite.iter().sum::<f64>() / finite.len() as f64);
    (mean, infinite)
}

/// Fits `kind` on `train` and returns an interval for every row of `test`
/// together with the cost counters. Randomness comes from `config.seed`.
pub fn predict_intervals(
    kind: MethodKind,
    train: &Dataset,
    test: &[Vec<f64>],
    config: &MethodConfig,
) -> Result<(Vec<PredictionInterval>, CostSnapshot)> {
    if let Some(row) = test.iter().find(|r| r.len() != train.n_features()) {
        return Err(Error::DimensionMismatch(format!(
            "test row has {} features, training data has {}",
            row.len(),
            train.n_features()
        )));
    }
    let mut rng = SeededRng::new(config.seed, 0);
    let fitted = fit_method(kind, train, config, &mut rng)?;
    let intervals = par::try_map_range(config.execution, test.len(), |t| {
        fitted.interval(&test[t], config.alpha)
    })?;
    Ok((intervals, fitted.counters()))
}

fn load_pool(plan: &ExperimentPlan) -> Result<Option<Dataset>> {
    let DataSource::Csv { paths, response } = &plan.data else {
        return Ok(None);
    };
    let mut pooled: Option<NumericTable> = None;
    for path in paths {
        let table = NumericTable::read(path)?;
        match &mut pooled {
            None => pooled = Some(table),
            Some(p) if p.headers == table.headers => p.rows.extend(table.rows),
            Some(_) => {
                return Err(Error::DimensionMismatch(format!(
                    "{} has a different header from the first CSV file",
                    path.display()
                )))
            }
        }
    }
    let table = pooled.ok_or(Error::EmptyInput("no CSV files given"))?;
    let col = table
        .response_column(response)
        .ok_or_else(|| Error::Parse {
            row: 0,
            column: format!("{response:?}"),
            message: "response column not found in header".into(),
        })?;
    let data = table.into_dataset(col)?;
    if plan.n_train + plan.n_test > data.len() {
        return Err(Error::ConfigInvalid(format!(
            "n_train + n_test = {} exceeds the {} available rows",
            plan.n_train + plan.n_test,
            data.len()
        )));
    }
    Ok(Some(data))
}

fn split_data(
    plan: &ExperimentPlan,
    pool: Option<&Dataset>,
    split: usize,
) -> Result<(Dataset, Dataset)> {
    let mut rng = SeededRng::derive(plan.seed, &[DATA_STREAM, split as u64]);
    match (&plan.data, pool) {
        (DataSource::Synthetic(spec), _) => {
            let (train, _) = spec.generate(plan.n_train, &mut rng)?;
            let (test, _) = spec.generate(plan.n_test, &mut rng)?;
            Ok((train, test))
        }
        (DataSource::Csv { .. }, Some(pool)) => {
            let order = draw_sample(
                pool.len(),
                plan.n_train + plan.n_test,
                SamplingMode::WithoutReplacement,
                &mut rng,
            )?;
            let (train, test) = order.indices.split_at(plan.n_train);
            Ok((pool.select(train), pool.select(test)))
        }
        (DataSource::Csv { .. }, None) => unreachable!("CSV pool is loaded before splitting"),
    }
}

fn run_method(
    plan: &ExperimentPlan,
    split: usize,
    method: usize,
    train: &Dataset,
    test: &Dataset,
) -> Result<SplitResult> {
    let run = &plan.methods[method];
    let mut rng = SeededRng::derive(plan.seed, &[METHOD_STREAM, split as u64, method as u64]);
    let fitted = fit_method(run.kind, train, &run.config, &mut rng)?;
    let intervals = par::try_map_range(run.config.execution, test.len(), |t| {
        fitted.interval(test.row(t), run.config.alpha)
    })?;
    let (mean_width, infinite_count) = width_summary(&intervals);
    Ok(SplitResult {
        coverage: Some(coverage(&intervals, test.responses())?),
        mean_width,
        infinite_count,
        counters: fitted.counters(),
        error: None,
    })
}

/// Runs every method on `n_splits` train/test splits.
///
/// Data for split `s` comes from a stream keyed by `(seed, s)`, so all
/// methods see the same points; each method then gets its own stream keyed by
/// `(seed, s, method index)`. A failing method is recorded in its split
/// result and the run continues.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<RunReport> {
    plan.validate()?;
    let pool = load_pool(plan)?;
    info!(
        "running {} methods on {} splits (n_train = {}, n_test = {})",
        plan.methods.len(),
        plan.n_splits,
        plan.n_train,
        plan.n_test
    );
    let per_split: Vec<Vec<SplitResult>> =
        par::try_map_range(plan.execution, plan.n_splits, |s| {
            let (train, test) = split_data(plan, pool.as_ref(), s)?;
            Ok::<_, Error>(par::map_range(plan.execution, plan.methods.len(), |j| {
                run_method(plan, s, j, &train, &test).unwrap_or_else(|e| {
                    warn!("{} failed on split {s}: {e}", plan.methods[j].label);
                    SplitResult {
                        coverage: None,
                        mean_width: None,
                        infinite_count: 0,
                        counters: CostSnapshot::default(),
                        error: Some(e.to_string()),
                    }
                })
            }))
        })?;

    let results = plan
        .methods
        .iter()
        .enumerate()
        .map(|(j, run)| MethodResult {
            method: run.label.clone(),
            splits: per_split.iter().map(|row| row[j].clone()).collect(),
        })
        .collect();

    let alpha = plan.methods.iter().map(|m| m.config.alpha).reduce(f64::max);
    let annotations = Annotations {
        floor_1_minus_2alpha: alpha.map(|a| 1.0 - 2.0 * a),
        theorem_s2_level: plan
            .stability
            .zip(alpha)
            .map(|(s, a)| theorem_s2_level(a, s.delta)),
        theorem_s3_level: plan
            .stability
            .zip(alpha)
            .map(|(s, a)| theorem_s3_level(a, s.delta, s.delta_star)),
    };
    Ok(RunReport {
        config: plan.clone(),
        results,
        annotations,
    })
}
