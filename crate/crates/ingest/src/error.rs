use std::path::PathBuf;

use locavqg_core::Direction;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("cache file line {line}: {reason}")]
    BadCache { line: usize, reason: String },
    #[error("ungeocoded: {0}")]
    Ungeocoded(String),
    #[error("uncaptioned ({direction}): {reason}")]
    Uncaptioned { direction: Direction, reason: String },
    #[error("unknown backend {0:?}")]
    UnknownBackend(String),
}

/// Failure reported by an external client (geocoder or captioner).
#[derive(Debug, Clone, thiserror::Error)]
pub enum ClientError {
    #[error("http error: {0}")]
    Http(String),
    #[error("service returned {0}")]
    Status(String),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("missing environment variable {0}")]
    MissingKey(&'static str),
    #[error("cannot read image {path}: {reason}")]
    Unreadable { path: String, reason: String },
    #[error("{0}")]
    Other(String),
}
