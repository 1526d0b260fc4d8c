use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("missing {what} at {path}; run `locavqg {producer}` first")]
    MissingArtifact {
        what: &'static str,
        path: PathBuf,
        producer: &'static str,
    },
    #[error("{0}")]
    Failed(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] locavqg_core::CoreError),
    #[error(transparent)]
    Ingest(#[from] locavqg_ingest::IngestError),
    #[error(transparent)]
    Prompt(#[from] locavqg_promptgen::PromptError),
    #[error(transparent)]
    Engage(#[from] locavqg_engage::EngageError),
    #[error(transparent)]
    Qgen(#[from] locavqg_qgen::QgenError),
    #[error(transparent)]
    Metrics(#[from] locavqg_metrics::MetricsError),
    #[error(transparent)]
    Bench(#[from] locavqg_bench::BenchError),
}

impl CliError {
    /// 1 for usage and configuration errors, 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            _ => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
