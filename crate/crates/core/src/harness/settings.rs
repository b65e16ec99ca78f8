//! Experiment settings read from a TOML file, with command-line overrides.
//!
//! ```toml
//! [data]
//! synthetic = "linear"      # or "friedman"; ignored when train_csv is set
//! # train_csv = "train.csv"
//! # test_csv = "test.csv"
//! # response_col = "y"      # header name or 0-based index; default: last column
//! n_train = 40
//! n_test = 200
//! p = 5
//! noise_sd = 1.0
//! coef_scale = 1.0
//! data_seed = 0
//!
//! [method]
//! alpha = 0.1
//! m = 40                    # default: n_train
//! sampling = "with"         # or "without"
//! b_mode = "random"         # or "fixed"
//! b = 20
//! b_tilde = 147             # default: floor(b / theta)
//! regressor = "ridge"       # knn, tree, forest
//! aggregation = "mean"      # median, trimmed-mean
//! trim = 0.25
//! seed = 0
//!
//! [experiment]
//! splits = 10
//! methods = ["jab", "jplus_ensemble"]
//! out_dir = "out"
//!
//! [stability]
//! epsilon = 0.1
//! delta_star = 0.01
//! epsilon_star = 0.0
//! lower = 0.0
//! upper = 1.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::aggregate::AggregationSpec;
use crate::config::{BMode, Execution, MethodConfig, SamplingMode};
use crate::error::{config_invalid, Error, Result};
use crate::methods::{stability_delta, StabilityParams};
use crate::quantile::snapped_floor;
use crate::regress::RegressorSpec;
use crate::resample::keep_probability;

use super::csv_data::ResponseSelector;
use super::plan::{DataSource, ExperimentPlan, MethodKind, MethodRun};
use super::synthetic::{SyntheticKind, SyntheticSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticChoice {
    Linear,
    Friedman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingChoice {
    With,
    Without,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BModeChoice {
    Fixed,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegressorChoice {
    Ridge,
    Knn,
    Tree,
    Forest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AggregationChoice {
    Mean,
    Median,
    TrimmedMean,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSettings {
    pub synthetic: Option<SyntheticChoice>,
    pub train_csv: Option<PathBuf>,
    pub test_csv: Option<PathBuf>,
    pub response_col: Option<String>,
    pub n_train: Option<usize>,
    pub n_test: Option<usize>,
    pub p: Option<usize>,
    pub noise_sd: Option<f64>,
    pub coef_scale: Option<f64>,
    pub data_seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSettings {
    pub alpha: Option<f64>,
    pub m: Option<usize>,
    pub sampling: Option<SamplingChoice>,
    pub b_mode: Option<BModeChoice>,
    pub b: Option<usize>,
    pub b_tilde: Option<usize>,
    pub regressor: Option<RegressorChoice>,
    pub aggregation: Option<AggregationChoice>,
    pub trim: Option<f64>,
    pub seed: Option<u64>,
    pub lambda_factor: Option<f64>,
    pub k: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_leaf: Option<usize>,
    pub n_trees: Option<usize>,
    pub feature_subsample: Option<f64>,
    pub sequential: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSettings {
    pub splits: Option<usize>,
    pub methods: Option<Vec<MethodKind>>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySettings {
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon_star: Option<f64>,
    pub delta_star: Option<f64>,
    pub theta: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[serde(default)]
    pub data: DataSettings,
    #[serde(default)]
    pub method: MethodSettings,
    #[serde(default)]
    pub experiment: ExperimentSettings,
    #[serde(default)]
    pub stability: StabilitySettings,
}

pub const DEFAULT_ALPHA: f64 = 0.1;
pub const DEFAULT_B: usize = 20;
pub const DEFAULT_N_TRAIN: usize = 40;
pub const DEFAULT_N_TEST: usize = 100;
pub const DEFAULT_SPLITS: usize = 10;
pub const DEFAULT_TRIM: f64 = 0.25;

impl Settings {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_invalid(format!("config file: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Keys set in `other` replace the ones in `self`.
    pub fn overridden_by(self, other: Settings) -> Settings {
        let mut base = to_table(&self);
        merge_tables(&mut base, to_table(&other));
        base.try_into()
            .expect("merging two valid settings tables yields valid settings")
    }

    pub fn n_train(&self) -> usize {
        self.data.n_train.unwrap_or(DEFAULT_N_TRAIN)
    }

    pub fn n_test(&self) -> usize {
        self.data.n_test.unwrap_or(DEFAULT_N_TEST)
    }

    pub fn alpha(&self) -> f64 {
        self.method.alpha.unwrap_or(DEFAULT_ALPHA)
    }

    pub fn execution(&self) -> Execution {
        if self.method.sequential.unwrap_or(false) {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    pub fn regressor(&self) -> RegressorSpec {
        let s = &self.method;
        let mut spec = match s.regressor.unwrap_or(RegressorChoice::Ridge) {
            RegressorChoice::Ridge => RegressorSpec::ridge(),
            RegressorChoice::Knn => RegressorSpec::knn(),
            RegressorChoice::Tree => RegressorSpec::tree(),
            RegressorChoice::Forest => RegressorSpec::forest(),
        };
        let set = |slot: &mut usize, v: Option<usize>| *slot = v.unwrap_or(*slot);
        match &mut spec {
            RegressorSpec::Ridge { lambda_factor } => {
                *lambda_factor = s.lambda_factor.unwrap_or(*lambda_factor);
            }
            RegressorSpec::Knn { k } => set(k, s.k),
            RegressorSpec::Tree {
                max_depth,
                min_leaf,
            } => {
                set(max_depth, s.max_depth);
                set(min_leaf, s.min_leaf);
            }
            RegressorSpec::Forest {
                n_trees,
                max_depth,
                min_leaf,
                feature_subsample,
            } => {
                set(n_trees, s.n_trees);
                set(max_depth, s.max_depth);
                set(min_leaf, s.min_leaf);
                *feature_subsample = s.feature_subsample.unwrap_or(*feature_subsample);
            }
        }
        spec
    }

    pub fn aggregation(&self) -> AggregationSpec {
        match self.method.aggregation.unwrap_or(AggregationChoice::Mean) {
            AggregationChoice::Mean => AggregationSpec::mean(),
            AggregationChoice::Median => AggregationSpec::median(),
            AggregationChoice::TrimmedMean => {
                AggregationSpec::trimmed_mean(self.method.trim.unwrap_or(DEFAULT_TRIM))
            }
        }
    }

    pub fn sampling(&self) -> SamplingMode {
        match self.method.sampling.unwrap_or(SamplingChoice::With) {
            SamplingChoice::With => SamplingMode::WithReplacement,
            SamplingChoice::Without => SamplingMode::WithoutReplacement,
        }
    }

    /// Configuration for a J+aB fit on `n` training points. In random mode
    /// without an explicit `b_tilde`, `b_tilde = floor(b / theta)` so the
    /// expected ensemble size matches `b`.
    pub fn method_config(&self, n: usize) -> Result<MethodConfig> {
        let m = self.method.m.unwrap_or(n).max(1);
        let sampling = self.sampling();
        let b = self.method.b.unwrap_or(DEFAULT_B);
        let b_mode = match self.method.b_mode.unwrap_or(BModeChoice::Fixed) {
            BModeChoice::Fixed => BMode::Fixed(b),
            BModeChoice::Random => match self.method.b_tilde {
                Some(b_tilde) => BMode::Random(b_tilde),
                None => {
                    let theta = keep_probability(n, m, sampling)?;
                    BMode::Random(snapped_floor(b as f64 / theta).max(1))
                }
            },
        };
        let config = MethodConfig {
            alpha: self.alpha(),
            m,
            sampling,
            b_mode,
            regressor: self.regressor(),
            aggregation: self.aggregation(),
            seed: self.method.seed.unwrap_or(0),
            execution: self.execution(),
        };
        config.validate()?;
        Ok(config)
    }

    /// Configuration for `kind`; the J+ ensemble always uses a fixed `b`.
    pub fn config_for(&self, kind: MethodKind, n: usize) -> Result<MethodConfig> {
        let mut config = self.method_config(n)?;
        if kind == MethodKind::JplusEnsemble {
            config.b_mode = BMode::Fixed(self.method.b.unwrap_or(DEFAULT_B));
        }
        Ok(config)
    }

    pub fn data_source(&self) -> Result<DataSource> {
        let d = &self.data;
        if let Some(train) = &d.train_csv {
            return Ok(DataSource::Csv {
                paths: std::iter::once(train.clone())
                    .chain(d.test_csv.clone())
                    .collect(),
                response: self.response_selector(),
            });
        }
        let p = d.p.unwrap_or(5);
        let noise_sd = d.noise_sd.unwrap_or(1.0);
        let kind = match d.synthetic.unwrap_or(SyntheticChoice::Linear) {
            SyntheticChoice::Linear => SyntheticKind::Linear {
                p,
                coef_scale: d.coef_scale.unwrap_or(1.0),
                noise_sd,
            },
            SyntheticChoice::Friedman => SyntheticKind::Friedman { p, noise_sd },
        };
        let spec = SyntheticSpec {
            kind,
            seed: d.data_seed.unwrap_or(0),
        };
        spec.validate()?;
        Ok(DataSource::Synthetic(spec))
    }

    pub fn response_selector(&self) -> ResponseSelector {
        self.data
            .response_col
            .as_deref()
            .map_or(ResponseSelector::Last, ResponseSelector::parse)
    }

    /// `(epsilon, delta)` and `(epsilon*, delta*)` when enough keys are set.
    /// A missing `delta` is computed from `b`, `theta`, `lower` and `upper`.
    pub fn stability_params(&self) -> Result<Option<StabilityParams>> {
        let s = &self.stability;
        let (Some(epsilon), Some(delta_star)) = (s.epsilon, s.delta_star) else {
            return Ok(None);
        };
        let delta = match s.delta {
            Some(d) => d,
            None => {
                let (Some(lower), Some(upper)) = (s.lower, s.upper) else {
                    return Err(config_invalid(
                        "stability needs either delta or both lower and upper",
                    ));
                };
                let theta = match s.theta {
                    Some(t) => t,
                    None => {
                        let n = self.n_train();
                        keep_probability(n, self.method.m.unwrap_or(n), self.sampling())?
                    }
                };
                stability_delta(
                    self.method.b.unwrap_or(DEFAULT_B),
                    theta,
                    epsilon,
                    lower,
                    upper,
                )?
            }
        };
        let params = StabilityParams {
            epsilon,
            delta,
            epsilon_star: s.epsilon_star.unwrap_or(0.0),
            delta_star,
        };
        Ok(Some(params))
    }

    pub fn experiment_plan(&self) -> Result<ExperimentPlan> {
        let n_train = self.n_train();
        let kinds = self
            .experiment
            .methods
            .clone()
            .unwrap_or_else(|| vec![MethodKind::Jab]);
        let methods = kinds
            .into_iter()
            .map(|kind| {
                Ok(MethodRun {
                    label: kind.name().to_string(),
                    kind,
                    config: self.config_for(kind, n_train)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let plan = ExperimentPlan {
            data: self.data_source()?,
            n_train,
            n_test: self.n_test(),
            n_splits: self.experiment.splits.unwrap_or(DEFAULT_SPLITS),
            seed: self.method.seed.unwrap_or(0),
            methods,
            stability: self.stability_params()?,
            execution: self.execution(),
        };
        plan.validate()?;
        Ok(plan)
    }
}

fn to_table(settings: &Settings) -> toml::Table {
    toml::Table::try_from(settings).expect("settings serialize to a TOML table")
}

fn merge_tables(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge_tables(b, o),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}
