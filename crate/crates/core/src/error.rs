use std::path::PathBuf;

use crate::validate::ValidationReport;

#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: invalid record: {report}")]
    Invalid { line: usize, report: ValidationReport },
    #[error("dataset file has no header line")]
    MissingHeader,
    #[error("line {line}: unexpected {found}")]
    Unexpected { line: usize, found: &'static str },
    #[error("serialization failed: {0}")]
    Serialize(#[source] serde_json::Error),
}

impl CoreError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CoreError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
