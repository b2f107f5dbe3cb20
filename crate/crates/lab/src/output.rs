use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use serde::Serialize;

use crate::config::Config;
use crate::error::{LabError, Result};
use crate::pipeline::{run_experiment, Outcome};
use crate::report::{SeriesRow, SCHEMA_VERSION};

pub const REPORT_FILE: &str = "report.json";
pub const SWEEP_INDEX_FILE: &str = "sweep.json";

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| LabError::Write(dir.to_path_buf(), e))
}

pub fn write_series(path: &Path, rows: &[SeriesRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| LabError::Write(path.to_path_buf(), e))
}

/// Writes `report.json` and the emitted series into `dir`.
pub fn write_outcome(dir: &Path, outcome: &Outcome) -> Result<PathBuf> {
    create_dir(dir)?;
    for (stage, rows) in &outcome.series {
        write_series(&dir.join(format!("{stage}.csv")), rows)?;
    }
    let path = dir.join(REPORT_FILE);
    fs::write(&path, outcome.report.to_json()?).map_err(|e| LabError::Write(path.clone(), e))?;
    Ok(path)
}

#[derive(Debug, Serialize)]
pub struct SweepEntry {
    pub dir: String,
    pub value: toml::Value,
    pub complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct SweepIndex {
    pub schema_version: String,
    pub key: String,
    pub entries: Vec<SweepEntry>,
}

/// Summary of a `run` invocation: the written report paths and whether
/// every report came out complete.
#[derive(Debug)]
pub struct RunSummary {
    pub reports: Vec<(PathBuf, Outcome)>,
    pub failures: Vec<(String, LabError)>,
}

impl RunSummary {
    pub fn all_complete(&self) -> bool {
        self.failures.is_empty() && self.reports.iter().all(|(_, o)| o.report.complete)
    }
}

/// Runs one experiment, or every variant of its sweep concurrently, each
/// into its own directory under `out`.
pub fn run_config(cfg: &Config, seed: u64, out: &Path) -> Result<RunSummary> {
    let Some(sweep) = &cfg.sweep else {
        let outcome = run_experiment(cfg, seed)?;
        let path = write_outcome(out, &outcome)?;
        return Ok(RunSummary { reports: vec![(path, outcome)], failures: vec![] });
    };
    let variants = cfg.expand_sweep()?;
    create_dir(out)?;
    let dirs: Vec<String> = (0..variants.len()).map(|i| format!("sweep-{i:03}")).collect();
    let results: Vec<Result<(PathBuf, Outcome)>> = thread::scope(|s| {
        let handles: Vec<_> = variants
            .iter()
            .zip(&dirs)
            .map(|((_, c), d)| {
                let dir = out.join(d);
                s.spawn(move || -> Result<(PathBuf, Outcome)> {
                    let outcome = run_experiment(c, seed)?;
                    Ok((write_outcome(&dir, &outcome)?, outcome))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut summary = RunSummary { reports: vec![], failures: vec![] };
    let mut entries = Vec::with_capacity(results.len());
    for ((r, (value, _)), dir) in results.into_iter().zip(&variants).zip(&dirs) {
        match r {
            Ok((path, outcome)) => {
                entries.push(SweepEntry { dir: dir.clone(), value: value.clone(), complete: outcome.report.complete, error: None });
                summary.reports.push((path, outcome));
            }
            Err(e) => {
                entries.push(SweepEntry { dir: dir.clone(), value: value.clone(), complete: false, error: Some(e.to_string()) });
                summary.failures.push((dir.clone(), e));
            }
        }
    }
    let index = SweepIndex { schema_version: SCHEMA_VERSION.to_string(), key: sweep.key.clone(), entries };
    let path = out.join(SWEEP_INDEX_FILE);
    let mut text = serde_json::to_string_pretty(&index)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| LabError::Write(path, e))?;
    Ok(summary)
}
