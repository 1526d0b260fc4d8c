use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("http error: {0}")]
    Http(String),
    #[error("backend returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed backend response: {0}")]
    Malformed(String),
    #[error("missing environment variable {0}")]
    MissingKey(&'static str),
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, thiserror::Error)]
pub enum PromptError {
    #[error("task {task_id} ungenerated after {attempts} attempts: {reason}")]
    Ungenerated {
        task_id: String,
        attempts: u32,
        reason: String,
    },
    #[error("no numbered questions found in response")]
    Unparseable { raw: String },
    #[error("invalid llm config: {0}")]
    InvalidConfig(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
