use std::path::{Path, PathBuf};
use std::time::Duration;

use locavqg_bench::{measure, MeasureConfig, ModelRunner, SleepRunner};
use locavqg_core::{CaptionedTask, Direction, DirectionalImages, EngagementScorer, GeoCoordinate, LocaVQGTask};
use locavqg_qgen::{load_checkpoint, DecodeConfig, QuestionGenerator, Seq2Seq32, Seq2SeqGenerator, WordTokenizer};

use super::infer::decode_config;
use super::train::require_checkpoint;
use super::{build_scorer, out};
use crate::app::{Outcome, Status};
use crate::config::PipelineConfig;
use crate::error::Result as CliResult;

/// Times checkpoint load, text-in to text-out generation and, when
/// filtered, scoring plus regeneration until acceptance.
pub struct CheckpointRunner {
    pub dir: PathBuf,
    pub decode: DecodeConfig,
    pub include_address: bool,
    pub scorer: Option<Box<dyn EngagementScorer>>,
    pub threshold: f64,
    pub max_attempts: usize,
    loaded: Option<(Seq2Seq32, WordTokenizer)>,
}

impl CheckpointRunner {
    fn generator(&self) -> Result<Seq2SeqGenerator<'_, f32>, String> {
        let (model, tokenizer) = self.loaded.as_ref().ok_or("model not loaded")?;
        Ok(Seq2SeqGenerator {
            model,
            tokenizer,
            decode: self.decode,
            include_address: self.include_address,
        })
    }
}

impl ModelRunner for CheckpointRunner {
    fn load(&mut self) -> Result<(), String> {
        let (m, t, _) = load_checkpoint::<f32>(&self.dir).map_err(|e| e.to_string())?;
        self.loaded = Some((m, t));
        Ok(())
    }

    fn infer(&mut self, task: &CaptionedTask) -> Result<String, String> {
        let g = self.generator()?;
        g.generate(task, 0).map(|q| q.text).map_err(|e| e.to_string())
    }

    fn post_filter(&mut self, task: &CaptionedTask, question: &str) -> Option<Result<usize, String>> {
        let scorer = self.scorer.as_ref()?;
        let run = || -> Result<usize, String> {
            let g = self.generator()?;
            let mut s = scorer.score(question);
            let mut n = 1;
            while s < self.threshold && n < self.max_attempts {
                let q = g.generate(task, n).map_err(|e| e.to_string())?;
                s = scorer.score(&q.text);
                n += 1;
            }
            Ok(n)
        };
        Some(run())
    }

    fn id(&self) -> String {
        match &self.loaded {
            Some((m, t)) => format!("{}+{}", m.architecture_id(), t.id()),
            None => self.dir.display().to_string(),
        }
    }
}

fn placeholder_task() -> CaptionedTask {
    CaptionedTask {
        task: LocaVQGTask {
            task_id: "bench-0".into(),
            coordinate: GeoCoordinate::new(40.4406, -79.9959),
            images: DirectionalImages::new("n", "e", "s", "w"),
            city: None,
        },
        captions: Direction::ALL.iter().map(|d| (*d, "a city street".to_string())).collect(),
        address: "Pittsburgh, PA, USA".into(),
    }
}

/// Tasks from the dataset when present, else one placeholder task.
fn bench_tasks(cfg: &PipelineConfig) -> CliResult<Vec<CaptionedTask>> {
    let path = cfg.paths.dataset();
    if path.exists() {
        let d = locavqg_core::Dataset::read(&path)?;
        if !d.records.is_empty() {
            return Ok(d.records.into_iter().map(|r| r.captioned).collect());
        }
    }
    Ok(vec![placeholder_task()])
}

pub fn cmd_bench(cfg: &PipelineConfig, model: &str, trials: Option<usize>, filtered: bool, output: Option<&Path>) -> CliResult<Outcome> {
    let mc = MeasureConfig {
        trials: trials.unwrap_or(cfg.bench.trials),
        warmup: cfg.bench.warmup,
    };
    let tasks = bench_tasks(cfg)?;
    let mut runner: Box<dyn ModelRunner> = if model == "stub" {
        let r = SleepRunner::new(Duration::from_millis(cfg.bench.stub_ms));
        Box::new(if filtered { r.filtered(Duration::from_millis(cfg.bench.stub_ms), 0.4, cfg.seed) } else { r })
    } else {
        let dir = PathBuf::from(model);
        require_checkpoint(&dir, "train")?;
        Box::new(CheckpointRunner {
            dir,
            decode: decode_config(cfg),
            include_address: cfg.ablation.include_address,
            scorer: if filtered { Some(build_scorer(cfg)?) } else { None },
            threshold: cfg.classifier.threshold,
            max_attempts: cfg.infer.max_attempts,
            loaded: None,
        })
    };
    let report = measure(runner.as_mut(), &tasks, mc)?;
    let path = out(cfg, output, "latency_report.json");
    report.save(&path)?;
    Ok(Outcome::new(Status::Success, vec![path]))
}
