use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Bumped whenever a field is renamed, removed or changes meaning.
pub const SCHEMA_VERSION: &str = "denjoy-lab/report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Ok,
    Error,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub status: StageStatus,
    pub metrics: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// CSV file name relative to the report, when the series was emitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series_file: Option<String>,
    pub series_rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub stage: String,
    pub label: String,
    pub value: String,
    /// Scale and budget the verdict is conditional on.
    pub qualifier: String,
}

impl Verdict {
    pub fn new(stage: &str, label: &str, value: impl Into<String>, qualifier: impl Into<String>) -> Verdict {
        Verdict { stage: stage.into(), label: label.into(), value: value.into(), qualifier: qualifier.into() }
    }

    pub fn line(&self) -> String {
        format!("{}: {} ({})", self.label, self.value, self.qualifier)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: String,
    pub pipeline: String,
    pub map: Option<String>,
    pub seed: u64,
    pub config: Value,
    pub stages: BTreeMap<String, StageReport>,
    pub verdicts: Vec<Verdict>,
    pub complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub incomplete_reason: Option<String>,
    /// Wall time per stage in seconds; the only non-reproducible field.
    pub timings: BTreeMap<String, f64>,
}

/// One CSV row: index, value, and the bound it is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub n: u64,
    pub value: f64,
    pub bound: f64,
}

impl ExperimentReport {
    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn verdict(&self, label: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.label == label)
    }
}
