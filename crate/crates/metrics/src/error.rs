use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("at least one reference is required")]
    NoReferences,
    #[error("no noun tokens")]
    NoNouns,
    #[error("sample size must be >= 2, got {0}")]
    SampleTooSmall(usize),
    #[error("metric {name} is not finite: {value}")]
    NonFinite { name: String, value: f64 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {reason}")]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("unparseable tree: {0}")]
    Tree(String),
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, MetricsError>;
