use std::path::Path;

use locavqg_core::{CaptionedTask, EngagementScorer};
use locavqg_qgen::{filtered_generate, load_checkpoint, DecodeConfig, QuestionGenerator, Seq2Seq32, Seq2SeqGenerator, WordTokenizer};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::train::{default_student, require_checkpoint};
use super::{build_scorer, load_dataset, out, write_jsonl};
use crate::app::{Outcome, Status};
use crate::config::PipelineConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub task_id: String,
    pub question: String,
    pub engaging_score: f64,
    pub attempts: usize,
    pub fallback: bool,
    pub filtered: bool,
}

pub fn decode_config(cfg: &PipelineConfig) -> DecodeConfig {
    let mut d = if cfg.infer.greedy {
        DecodeConfig::greedy()
    } else {
        DecodeConfig::nucleus(cfg.infer.top_p, cfg.seed)
    };
    d.seed = cfg.seed;
    d.temperature = cfg.infer.temperature;
    d.max_len = cfg.infer.max_len;
    d
}

pub fn predict(
    generator: &dyn QuestionGenerator,
    scorer: &dyn EngagementScorer,
    ct: &CaptionedTask,
    filtered: bool,
    max_attempts: usize,
    threshold: f64,
) -> locavqg_qgen::Result<Prediction> {
    if filtered {
        let f = filtered_generate(generator, scorer, ct, max_attempts, threshold)?;
        Ok(Prediction {
            task_id: ct.task_id().to_string(),
            engaging_score: f.question.engaging_score.unwrap_or(0.0),
            question: f.question.text,
            attempts: f.attempts,
            fallback: f.fallback,
            filtered: true,
        })
    } else {
        let q = generator.generate(ct, 0)?;
        Ok(Prediction {
            task_id: ct.task_id().to_string(),
            engaging_score: scorer.score(&q.text),
            question: q.text,
            attempts: 1,
            fallback: false,
            filtered: false,
        })
    }
}

pub fn load_generator_parts(cfg: &PipelineConfig, checkpoint: Option<&Path>) -> Result<(Seq2Seq32, WordTokenizer)> {
    let dir = checkpoint
        .map(Path::to_path_buf)
        .or_else(|| cfg.infer.checkpoint.clone())
        .unwrap_or_else(|| default_student(cfg));
    require_checkpoint(&dir, "distill")?;
    let (m, t, _) = load_checkpoint::<f32>(&dir)?;
    Ok((m, t))
}

/// One question per dataset task, in dataset order.
pub fn cmd_infer(cfg: &PipelineConfig, checkpoint: Option<&Path>, filtered: bool, output: Option<&Path>) -> Result<Outcome> {
    let (model, tok) = load_generator_parts(cfg, checkpoint)?;
    let data = load_dataset(&cfg.paths.dataset())?;
    let scorer = build_scorer(cfg)?;
    let generator = Seq2SeqGenerator {
        model: &model,
        tokenizer: &tok,
        decode: decode_config(cfg),
        include_address: cfg.ablation.include_address,
    };
    let results: Vec<_> = data
        .records
        .par_iter()
        .map(|r| {
            predict(
                &generator,
                scorer.as_ref(),
                &r.captioned,
                filtered,
                cfg.infer.max_attempts,
                cfg.classifier.threshold,
            )
            .map_err(|e| (r.task_id().to_string(), e))
        })
        .collect();
    let mut preds = Vec::new();
    let mut failures = 0;
    for r in results {
        match r {
            Ok(p) => preds.push(p),
            Err((id, e)) => {
                log::warn!("task {id}: {e}");
                failures += 1;
            }
        }
    }
    if preds.is_empty() {
        return Err(CliError::Failed("no task produced a question".into()));
    }
    let path = out(cfg, output, "predictions.jsonl");
    write_jsonl(&path, &preds)?;
    let status = if failures == 0 { Status::Success } else { Status::Partial };
    Ok(Outcome::new(status, vec![path]))
}
