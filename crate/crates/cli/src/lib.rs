//! Command-line orchestration of the pipeline: ingest, dataset generation,
//! classifier and generator training, distillation, inference, evaluation,
//! corpus statistics and latency benchmarks.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod runlog;

pub use app::{execute, Cli, Command, Outcome, Status};
pub use config::PipelineConfig;
pub use error::{CliError, Result};
pub use runlog::RunManifest;
