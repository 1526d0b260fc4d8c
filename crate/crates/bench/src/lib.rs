//! Latency harness: cold-start load once, then timed inference and
//! post-filter trials cycled over the tasks.

pub mod hardware;
pub mod measure;
pub mod stub;

pub use hardware::Hardware;
pub use measure::{measure, mean, BenchError, LatencyReport, MeasureConfig, ModelRunner, Result, TIMING_SCOPE};
pub use stub::SleepRunner;
