use std::collections::HashMap;
use std::path::Path;

use locavqg_metrics::{
    bleu4, corpus_bleu4, embedding_score, rouge2, EmbeddingBackend, HashedEncoder, MetricReport, MetricValue,
    BLEU_SMOOTHING,
};
use serde_json::json;

use super::infer::Prediction;
use super::{load_dataset, out, read_jsonl, require};
use crate::app::{Outcome, Status};
use crate::config::{Backend, PipelineConfig};
use crate::error::{CliError, Result};

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Multi-reference overlap and embedding metrics of predictions against
/// each task's kept dataset questions.
pub fn evaluate_predictions(cfg: &PipelineConfig, preds: &[Prediction], refs: &HashMap<String, Vec<String>>) -> Result<MetricReport> {
    let pairs: Vec<(&str, Vec<&str>)> = preds
        .iter()
        .filter_map(|p| {
            let r = refs.get(&p.task_id)?;
            (!r.is_empty()).then(|| (p.question.as_str(), r.iter().map(String::as_str).collect()))
        })
        .collect();
    if pairs.is_empty() {
        return Err(CliError::Failed("no prediction has reference questions".into()));
    }
    let tok = json!({"tokenizer": locavqg_core::text::TOKENIZER_POLICY, "pairs": pairs.len()});
    let mut report = MetricReport::default();
    let mut sent_bleu = Vec::new();
    let mut r2 = Vec::new();
    for (c, rs) in &pairs {
        sent_bleu.push(bleu4(c, rs)?);
        r2.push(rouge2(c, rs)?);
    }
    report.set(
        "bleu4",
        corpus_bleu4(&pairs)?,
        json!({"aggregation": "corpus", "smoothing": BLEU_SMOOTHING, "tokenizer": tok["tokenizer"], "pairs": pairs.len()}),
    )?;
    report.set(
        "bleu4_sentence_mean",
        mean(&sent_bleu),
        json!({"aggregation": "mean", "smoothing": BLEU_SMOOTHING, "tokenizer": tok["tokenizer"]}),
    )?;
    report.set("rouge2", mean(&r2), json!({"aggregation": "mean", "variant": "bigram-f1", "tokenizer": tok["tokenizer"]}))?;

    let encoder = HashedEncoder::default();
    let bert = match cfg.backends.encoder {
        Backend::Stub => Some(EmbeddingBackend::BertScore(&encoder)),
        Backend::Real => None,
    };
    match bert {
        Some(b) => {
            let mut v = Vec::new();
            for (c, rs) in &pairs {
                if let Some(x) = embedding_score(c, rs, &b)?.value() {
                    v.push(x);
                }
            }
            report.set("bertscore", mean(&v), json!({"checkpoint": b.checkpoint_id(), "aggregation": "mean"}))?;
        }
        None => report.insert(
            "bertscore",
            MetricValue::Unavailable("no pretrained encoder checkpoint installed".into()),
            json!({"checkpoint": "none"}),
        )?,
    }
    let bleurt = EmbeddingBackend::Bleurt(None);
    let v = embedding_score(pairs[0].0, &pairs[0].1, &bleurt)?;
    report.insert("bleurt", v, json!({"checkpoint": bleurt.checkpoint_id()}))?;

    let scores: Vec<f64> = preds.iter().map(|p| p.engaging_score).collect();
    report.set("engaging_score_mean", mean(&scores), json!({"predictions": preds.len()}))?;
    let attempts: Vec<f64> = preds.iter().map(|p| p.attempts as f64).collect();
    report.set("attempts_mean", mean(&attempts), json!({}))?;
    Ok(report)
}

pub fn cmd_eval(cfg: &PipelineConfig, predictions: Option<&Path>, output: Option<&Path>) -> Result<Outcome> {
    let pred_path = predictions.map(Path::to_path_buf).unwrap_or_else(|| cfg.paths.predictions());
    require(&pred_path, "predictions", "infer")?;
    let preds: Vec<Prediction> = read_jsonl(&pred_path)?;
    let data = load_dataset(&cfg.paths.dataset())?;
    let refs: HashMap<String, Vec<String>> = data
        .records
        .iter()
        .map(|r| (r.task_id().to_string(), r.questions.iter().map(|q| q.text.clone()).collect()))
        .collect();
    let report = evaluate_predictions(cfg, &preds, &refs)?;
    let path = out(cfg, output, "eval_report.json");
    report.save(&path)?;
    let unmatched = preds.iter().filter(|p| refs.get(&p.task_id).map_or(true, Vec::is_empty)).count();
    let status = if unmatched == 0 { Status::Success } else { Status::Partial };
    Ok(Outcome::new(status, vec![path]))
}
