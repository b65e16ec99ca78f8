//! Jackknife+-after-bootstrap prediction intervals.
//!
//! J+aB wraps a bagged or subagged ensemble: each training point's
//! leave-one-out model is the aggregate of the members whose resample left
//! that point out, so intervals come at the cost of the ensemble fits
//! alone. With the ensemble size drawn as a Binomial, coverage is at least
//! `1 - 2 alpha` for any data distribution.
//!
//! Modules:
//! - [`quantile`], [`resample`], [`aggregate`], [`regress`]: building blocks.
//! - [`methods`]: J+aB, jackknife-minmax-after-bootstrap, jackknife,
//!   jackknife+ (plain and ensembled), score-based sets, stability bounds.
//! - [`oracle`]: lifted residual arrays, tournament matrices and the
//!   coupling check, usable as executable invariants.
//! - [`harness`]: synthetic and CSV data, experiments and reports.
//!
//! With the default `parallel` feature, fits, evaluations and experiment
//! splits run on rayon; without it everything runs sequentially with
//! identical results.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregate;
pub mod config;
pub mod counters;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod interval;
pub mod methods;
pub mod oracle;
pub mod par;
pub mod quantile;
pub mod regress;
pub mod resample;
pub mod rng;

pub use aggregate::{aggregate, AggregationKind, AggregationSpec};
pub use config::{BMode, Execution, MethodConfig, SamplingMode};
pub use counters::{CostCounters, CostSnapshot};
pub use dataset::{validate_dataset, Dataset};
pub use error::{Error, Result};
pub use interval::PredictionInterval;
pub use quantile::{q_minus, q_plus, QuantileIndex};
pub use regress::{FittedModel, Predictor, Regressor, RegressorSpec};
pub use resample::{
    draw_b, draw_sample, keep_probability, matched_b_tilde, BTildeMatching, IndexSample,
};
pub use rng::SeededRng;
