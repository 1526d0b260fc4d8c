use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QgenError {
    #[error("no training examples")]
    NoExamples,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("tokenizer mismatch: student {student}, teacher {teacher}")]
    TokenizerMismatch { student: String, teacher: String },
    #[error("training diverged at epoch {epoch}, step {step} (loss {loss}); parameters restored to the end of epoch {restored_epoch}")]
    Diverged {
        epoch: usize,
        step: usize,
        loss: f64,
        /// 0 means the initial parameters.
        restored_epoch: usize,
    },
    #[error("task {task_id}: decoding produced an empty question twice")]
    EmptyDecode { task_id: String },
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
    #[error("{path}: {reason}")]
    BadCheckpoint { path: PathBuf, reason: String },
}

pub type Result<T> = std::result::Result<T, QgenError>;
