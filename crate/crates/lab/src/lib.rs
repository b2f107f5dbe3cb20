//! Batch runner for `denjoy-core` experiments: TOML configuration in,
//! JSON report and optional CSV series out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod report;

pub use config::{Config, Pipeline};
pub use error::{LabError, Result};
pub use output::{run_config, RunSummary};
pub use pipeline::{run_experiment, Outcome};
pub use report::{ExperimentReport, SeriesRow, Verdict, SCHEMA_VERSION};
