use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::config::{BMode, Execution, MethodConfig};
use crate::dataset::Dataset;
use crate::error::{config_invalid, Result};
use crate::methods::{
    fit_jab, fit_jackknife, fit_jplus, IntervalPredictor, JabPredictor, JplusVariant,
    StabilityParams,
};
use crate::rng::SeededRng;

use super::csv_data::ResponseSelector;
use super::synthetic::SyntheticSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    /// Jackknife+-after-bootstrap.
    Jab,
    /// Jackknife+ whose leave-one-out models are `B`-member ensembles.
    JplusEnsemble,
    /// Jackknife+ with a single base fit per left-out point.
    JplusBase,
    Jackknife,
    /// Jackknife-minmax-after-bootstrap.
    JmmAb,
}

impl MethodKind {
    pub const ALL: [MethodKind; 5] = [
        MethodKind::Jab,
        MethodKind::JplusEnsemble,
        MethodKind::JplusBase,
        MethodKind::Jackknife,
        MethodKind::JmmAb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Jab => "jab",
            MethodKind::JplusEnsemble => "jplus_ensemble",
            MethodKind::JplusBase => "jplus_base",
            MethodKind::Jackknife => "jackknife",
            MethodKind::JmmAb => "jmm_ab",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| config_invalid(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    /// Rows of all files are pooled before splitting.
    Csv {
        paths: Vec<PathBuf>,
        response: ResponseSelector,
    },
    /// Fresh draws for every split.
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRun {
    /// Name used in the report; must be unique within a plan.
    pub label: String,
    pub kind: MethodKind,
    pub config: MethodConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub data: DataSource,
    pub n_train: usize,
    pub n_test: usize,
    pub n_splits: usize,
    pub seed: u64,
    pub methods: Vec<MethodRun>,
    pub stability: Option<StabilityParams>,
    pub execution: Execution,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.n_train == 0 || self.n_test == 0 {
            return Err(config_invalid("n_train and n_test must be positive"));
        }
        if let DataSource::Synthetic(spec) = &self.data {
            spec.validate()?;
        }
        for (i, run) in self.methods.iter().enumerate() {
            run.config.validate_for(self.n_train)?;
            if self.methods[..i].iter().any(|r| r.label == run.label) {
                return Err(config_invalid(format!(
                    "duplicate method label {:?}",
                    run.label
                )));
            }
        }
        if let Some(s) = &self.stability {
            s.validate()?;
        }
        Ok(())
    }
}

/// Fits `kind` on `train`, drawing every random choice from `rng`.
pub fn fit_method(
    kind: MethodKind,
    train: &Dataset,
    config: &MethodConfig,
    rng: &mut SeededRng,
) -> Result<Box<dyn IntervalPredictor>> {
    config.validate_for(train.len())?;
    let reg = &config.regressor;
    let exec = config.execution;
    Ok(match kind {
        MethodKind::Jab | MethodKind::JmmAb => {
            let (ensemble, residuals) = fit_jab(train, reg, config, rng)?;
            Box::new(JabPredictor {
                ensemble,
                residuals,
                minmax: kind == MethodKind::JmmAb,
            })
        }
        MethodKind::JplusEnsemble => {
            let BMode::Fixed(b) = config.b_mode else {
                return Err(config_invalid("the J+ ensemble needs a fixed B"));
            };
            Box::new(fit_jplus(
                train,
                reg,
                JplusVariant::EnsembleLearner { b },
                config.m,
                config.sampling,
                &config.aggregation,
                rng,
                exec,
            )?)
        }
        MethodKind::JplusBase => Box::new(fit_jplus(
            train,
            reg,
            JplusVariant::BaseLearner,
            config.m,
            config.sampling,
            &config.aggregation,
            rng,
            exec,
        )?),
        MethodKind::Jackknife => Box::new(fit_jackknife(train, reg, rng.next_u64(), exec)?),
    })
}
