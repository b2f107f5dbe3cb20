use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: line {line}: field `{field}`: {message}")]
    Field { path: String, line: usize, field: String, message: String },
    #[error("sweep value #{index} for `{key}`: {message}")]
    Sweep { key: String, index: usize, message: String },
    #[error("cannot read {0}: {1}")]
    Read(PathBuf, std::io::Error),
    #[error("cannot write {0}: {1}")]
    Write(PathBuf, std::io::Error),
    #[error("{0}")]
    Core(#[from] denjoy_core::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
