use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::counters::CostSnapshot;
use crate::error::{Error, Result};

use super::plan::ExperimentPlan;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    /// Fraction of test responses inside their interval; absent when the
    /// method failed on this split.
    pub coverage: Option<f64>,
    /// Mean over finite-width intervals; absent when none were finite.
    pub mean_width: Option<f64>,
    pub infinite_count: usize,
    pub counters: CostSnapshot,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: String,
    pub splits: Vec<SplitResult>,
}

impl MethodResult {
    /// Average coverage over the splits that succeeded.
    pub fn mean_coverage(&self) -> Option<f64> {
        mean(self.splits.iter().filter_map(|s| s.coverage))
    }

    /// Average of the per-split mean widths.
    pub fn mean_width(&self) -> Option<f64> {
        mean(self.splits.iter().filter_map(|s| s.mean_width))
    }

    pub fn failures(&self) -> usize {
        self.splits.iter().filter(|s| s.error.is_some()).count()
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotations {
    /// `1 - 2 alpha` for the largest `alpha` in the plan.
    pub floor_1_minus_2alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem_s2_level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem_s3_level: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentPlan,
    pub results: Vec<MethodResult>,
    pub annotations: Annotations,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::NumericalFailure(format!("report serialization: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            row: e.line(),
            column: e.column().to_string(),
            message: e.to_string(),
        })
    }

    pub fn method(&self, label: &str) -> Option<&MethodResult> {
        self.results.iter().find(|r| r.method == label)
    }

    /// Tab-separated `(method, split, value)` rows; missing values are
    /// written as `NA`.
    pub fn tsv(&self, value: impl Fn(&SplitResult) -> Option<f64>) -> String {
        let mut out = String::from("method\tsplit\tvalue\n");
        for r in &self.results {
            for (i, s) in r.splits.iter().enumerate() {
                let v = value(s).map_or_else(|| "NA".to_string(), |v| v.to_string());
                writeln!(out, "{}\t{i}\t{v}", r.method).expect("writing to a String");
            }
        }
        out
    }
}

/// Writes `report.json`, `coverage_by_split.tsv` and `width_by_split.tsv`.
pub fn emit_report(report: &RunReport, out_dir: &Path) -> Result<()> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    std::fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let files = [
        ("report.json", report.to_json()?),
        ("coverage_by_split.tsv", report.tsv(|s| s.coverage)),
        ("width_by_split.tsv", report.tsv(|s| s.mean_width)),
    ];
    for (name, contents) in files {
        let path = out_dir.join(name);
        std::fs::write(&path, contents).map_err(io(&path))?;
    }
    Ok(())
}
