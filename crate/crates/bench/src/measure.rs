use std::path::Path;
use std::time::Instant;

use locavqg_core::CaptionedTask;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hardware::Hardware;

pub const TIMING_SCOPE: &str = "end-to-end text-in to text-out, tokenization included";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("trials must be >= 1")]
    NoTrials,
    #[error("at least one task is required")]
    NoTasks,
    #[error("runner failed: {0}")]
    Runner(String),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, BenchError>;

/// A model under test.
pub trait ModelRunner {
    /// Cold-start load; called exactly once.
    fn load(&mut self) -> std::result::Result<(), String>;

    fn infer(&mut self, task: &CaptionedTask) -> std::result::Result<String, String>;

    /// Scoring and regeneration for filtered models. Returns the number of
    /// attempts used, or `None` for an unfiltered model.
    fn post_filter(&mut self, task: &CaptionedTask, question: &str) -> Option<std::result::Result<usize, String>>;

    fn id(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureConfig {
    pub trials: usize,
    /// Leading trials run but excluded from the samples.
    pub warmup: usize,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self { trials: 300, warmup: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub runner: String,
    pub load_seconds: f64,
    pub inference_seconds: f64,
    pub inference_samples: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub post_filter_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub post_filter_samples: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attempts_per_task: Option<f64>,
    pub trials: usize,
    pub warmup_excluded: usize,
    pub hardware: Hardware,
    pub timing_scope: String,
}

impl LatencyReport {
    pub fn save(&self, path: &Path) -> Result<()> {
        let s = serde_json::to_string_pretty(self).expect("report serializes") + "\n";
        std::fs::write(path, s).map_err(|source| BenchError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Left-to-right sum divided by the count.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Runs `warmup + trials` single-threaded trials over `tasks` round-robin.
pub fn measure(runner: &mut dyn ModelRunner, tasks: &[CaptionedTask], cfg: MeasureConfig) -> Result<LatencyReport> {
    if cfg.trials == 0 {
        return Err(BenchError::NoTrials);
    }
    if tasks.is_empty() {
        return Err(BenchError::NoTasks);
    }
    let t0 = Instant::now();
    runner.load().map_err(BenchError::Runner)?;
    let load_seconds = t0.elapsed().as_secs_f64();

    let mut inf = Vec::with_capacity(cfg.trials);
    let mut post = Vec::with_capacity(cfg.trials);
    let mut attempts = Vec::with_capacity(cfg.trials);
    for i in 0..cfg.warmup + cfg.trials {
        let task = &tasks[i % tasks.len()];
        let t = Instant::now();
        let q = runner.infer(task).map_err(BenchError::Runner)?;
        let dt = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let pf = runner.post_filter(task, &q).transpose().map_err(BenchError::Runner)?;
        let pdt = t.elapsed().as_secs_f64();
        if i < cfg.warmup {
            continue;
        }
        inf.push(dt);
        if let Some(a) = pf {
            post.push(pdt);
            attempts.push(a as f64);
        }
    }
    let filtered = !post.is_empty();
    if filtered && post.len() != inf.len() {
        return Err(BenchError::Runner("post_filter applied to only some trials".into()));
    }
    let report = LatencyReport {
        runner: runner.id(),
        load_seconds,
        inference_seconds: mean(&inf),
        inference_samples: inf,
        post_filter_seconds: filtered.then(|| mean(&post)),
        post_filter_samples: filtered.then_some(post),
        attempts_per_task: filtered.then(|| mean(&attempts)),
        trials: cfg.trials,
        warmup_excluded: cfg.warmup,
        hardware: Hardware::detect(),
        timing_scope: TIMING_SCOPE.to_string(),
    };
    log::info!(
        "{}: load {:.3}s, inference {:.4}s over {} trials",
        report.runner,
        report.load_seconds,
        report.inference_seconds,
        report.trials
    );
    Ok(report)
}
