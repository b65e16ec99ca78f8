//! Data loading, experiments, reports and the verification suite.

mod csv_data;
mod experiment;
mod plan;
mod report;
pub mod settings;
mod synthetic;
pub mod verify;

pub use csv_data::{load_csv, load_test_csv, NumericTable, ResponseSelector};
pub use experiment::{coverage, predict_intervals, run_experiment, width_summary};
pub use plan::{fit_method, DataSource, ExperimentPlan, MethodKind, MethodRun};
pub use report::{emit_report, Annotations, MethodResult, RunReport, SplitResult};
pub use settings::Settings;
pub use synthetic::{SyntheticKind, SyntheticSpec};
