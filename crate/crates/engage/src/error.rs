use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngageError {
    #[error("empty {0} list")]
    EmptyInput(&'static str),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("training split lacks {0} examples")]
    SingleClass(&'static str),
    #[error("training diverged at epoch {epoch}, step {step}: loss {loss} (last finite loss {last_finite:?})")]
    Diverged {
        epoch: usize,
        step: usize,
        loss: f64,
        last_finite: Option<f64>,
    },
    #[error("{path}: line {line}: {reason}")]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, EngageError>;
