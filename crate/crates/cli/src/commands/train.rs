use std::path::{Path, PathBuf};

use locavqg_core::DatasetRecord;
use locavqg_qgen::{
    build_training_set, distill, evaluate, finetune, load_checkpoint, save_checkpoint, subsample_records,
    DistillConfig, ModelConfig, QGExample, Seq2Seq32, Tier, TrainConfig, WordTokenizer, MODEL_FILE,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{load_dataset, require, write_json};
use crate::app::{Outcome, Status};
use crate::config::PipelineConfig;
use crate::error::{CliError, Result};

/// Seeded split of the records into (train, validation).
pub fn split_records(records: &[DatasetRecord], val_fraction: f64, seed: u64) -> (Vec<DatasetRecord>, Vec<DatasetRecord>) {
    let mut idx: Vec<usize> = (0..records.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x7661_6c));
    let n_val = ((records.len() as f64) * val_fraction).round() as usize;
    let n_val = n_val.min(records.len().saturating_sub(1));
    let (val, train) = idx.split_at(n_val);
    let pick = |ix: &[usize]| {
        let mut ix = ix.to_vec();
        ix.sort_unstable();
        ix.into_iter().map(|i| records[i].clone()).collect::<Vec<_>>()
    };
    (pick(train), pick(val))
}

fn train_config(cfg: &PipelineConfig) -> TrainConfig {
    TrainConfig {
        epochs: cfg.train.epochs,
        lr: cfg.train.lr,
        batch_size: cfg.train.batch_size,
        seed: cfg.seed,
        clip_norm: cfg.train.clip_norm,
    }
}

fn examples(cfg: &PipelineConfig, records: &[DatasetRecord]) -> Vec<QGExample> {
    build_training_set(records, cfg.train.questions_per_task, cfg.ablation.include_address, cfg.seed)
}

fn val_loss(model: &Seq2Seq32, tok: &WordTokenizer, val: &[QGExample]) -> Result<Option<f64>> {
    if val.is_empty() {
        return Ok(None);
    }
    Ok(Some(evaluate(model, tok, val)?))
}

pub fn default_checkpoint_name(tier: Tier, fraction: f64) -> String {
    format!("{tier}-f{fraction:.2}")
}

/// Fine-tunes one checkpoint per dataset fraction.
pub fn cmd_train(cfg: &PipelineConfig, tier: Option<Tier>, fractions: &[f64], name: Option<&str>) -> Result<Outcome> {
    let tier = tier.unwrap_or(cfg.train.tier);
    let fractions = if fractions.is_empty() { cfg.fractions() } else { fractions.to_vec() };
    if let Some(bad) = fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
        return Err(CliError::Usage(format!("fractions must lie in (0, 1], got {bad}")));
    }
    if name.is_some() && fractions.len() > 1 {
        return Err(CliError::Usage("--name needs a single fraction".into()));
    }
    let data = load_dataset(&cfg.paths.dataset())?;
    let (train_recs, val_recs) = split_records(&data.records, cfg.train.val_fraction, cfg.seed);
    let val = examples(cfg, &val_recs);
    let mut outputs = Vec::new();
    for &f in &fractions {
        let subset = subsample_records(&train_recs, f, cfg.seed)?;
        let ex = examples(cfg, &subset);
        if ex.is_empty() {
            return Err(CliError::Failed(format!("fraction {f} leaves no training examples")));
        }
        let tok = WordTokenizer::build(
            ex.iter().flat_map(|e| [e.input.as_str(), e.target.as_str()]),
            cfg.train.min_count,
            cfg.train.max_vocab,
        );
        let mut model = Seq2Seq32::new(ModelConfig::tier(tier, tok.len()), tok.id(), cfg.seed)?;
        let curve = finetune(&mut model, &tok, &ex, &train_config(cfg))?;
        let vl = val_loss(&model, &tok, &val)?;
        let dir = cfg.paths.checkpoints().join(name.map_or_else(|| default_checkpoint_name(tier, f), String::from));
        let manifest = json!({
            "command": "train",
            "tier": tier,
            "dataset_fraction": f,
            "records": subset.len(),
            "examples": ex.len(),
            "seed": cfg.seed,
            "train": train_config(cfg),
            "include_address": cfg.ablation.include_address,
            "curve": curve,
            "val_loss": vl,
        });
        save_checkpoint(&dir, &model, &tok, &manifest)?;
        log::info!("{}: final loss {:.4}, val {:?}", dir.display(), curve.final_loss, vl);
        outputs.push(dir);
    }
    Ok(Outcome::new(Status::Success, outputs))
}

pub fn default_teacher(cfg: &PipelineConfig) -> PathBuf {
    cfg.distill
        .teacher
        .clone()
        .unwrap_or_else(|| cfg.paths.checkpoints().join(default_checkpoint_name(cfg.train.tier, 1.0)))
}

pub fn default_student(cfg: &PipelineConfig) -> PathBuf {
    cfg.paths.checkpoints().join(format!("distilled-{}", cfg.distill.student_tier))
}

pub fn require_checkpoint(dir: &Path, producer: &'static str) -> Result<()> {
    require(&dir.join(MODEL_FILE), "model checkpoint", producer)
}

/// Trains a student against a teacher checkpoint, sharing its tokenizer.
pub fn cmd_distill(
    cfg: &PipelineConfig,
    teacher: Option<&Path>,
    student_tier: Option<Tier>,
    name: Option<&str>,
) -> Result<Outcome> {
    let teacher_dir = teacher.map(Path::to_path_buf).unwrap_or_else(|| default_teacher(cfg));
    require_checkpoint(&teacher_dir, "train")?;
    let student_tier = student_tier.unwrap_or(cfg.distill.student_tier);
    let data = load_dataset(&cfg.paths.dataset())?;
    let (teacher_model, tok, _) = load_checkpoint::<f32>(&teacher_dir)?;
    let (train_recs, val_recs) = split_records(&data.records, cfg.train.val_fraction, cfg.seed);
    let subset = subsample_records(&train_recs, cfg.ablation.dataset_fraction, cfg.seed)?;
    let ex = examples(cfg, &subset);
    let val = examples(cfg, &val_recs);
    let mut student = Seq2Seq32::new(ModelConfig::tier(student_tier, tok.len()), tok.id(), cfg.seed)?;
    let dc = DistillConfig {
        alpha: cfg.distill.alpha,
        temperature: cfg.distill.temperature,
        train: train_config(cfg),
        questions_per_task: cfg.train.questions_per_task,
        sequence_level: cfg.distill.sequence_level,
    };
    let curve = distill(&teacher_model, &mut student, &tok, &ex, &dc)?;
    let vl = val_loss(&student, &tok, &val)?;
    let dir = match name {
        Some(n) => cfg.paths.checkpoints().join(n),
        None => cfg.paths.checkpoints().join(format!("distilled-{student_tier}")),
    };
    let manifest = json!({
        "command": "distill",
        "teacher": teacher_dir,
        "teacher_architecture": teacher_model.architecture_id(),
        "student_tier": student_tier,
        "alpha": dc.alpha,
        "temperature": dc.temperature,
        "sequence_level": dc.sequence_level,
        "dataset_fraction": cfg.ablation.dataset_fraction,
        "seed": cfg.seed,
        "train": dc.train,
        "curve": curve,
        "val_loss": vl,
    });
    save_checkpoint(&dir, &student, &tok, &manifest)?;
    write_json(&dir.join("distill_report.json"), &manifest)?;
    Ok(Outcome::new(Status::Success, vec![dir]))
}
