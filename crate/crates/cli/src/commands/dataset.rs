use locavqg_core::{CaptionedTask, Dataset, DatasetHeader, DatasetRecord, RetryPolicy, TokenBucket};
use locavqg_promptgen::{
    build_prompts_with_count, parse_questions, LlmBackend, LlmClient, LlmConfig, LlmRunner, OpenAiClient,
    ResponseCache, StubLlm,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::ingest::{run_ingest, status_of, IngestReport};
use super::{build_scorer, write_json};
use crate::app::{Outcome, Status};
use crate::config::{Backend, PipelineConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize)]
pub struct TaskFailure {
    pub task_id: String,
    pub stage: &'static str,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerationReport {
    pub ingest: IngestReport,
    pub failed: Vec<TaskFailure>,
    pub records: usize,
    pub questions_generated: usize,
    pub questions_kept: usize,
    pub questions_rejected: usize,
    pub filtered: bool,
    pub threshold: Option<f64>,
    pub scorer: String,
}

fn llm_runner(cfg: &PipelineConfig) -> Result<LlmRunner> {
    let llm = LlmConfig {
        backend: match cfg.backends.llm {
            Backend::Stub => LlmBackend::Stub,
            Backend::Real => LlmBackend::RemoteLlm,
        },
        model: cfg.llm.model.clone(),
        temperature: cfg.llm.temperature,
        presence_penalty: cfg.llm.presence_penalty,
        max_questions: cfg.llm.max_questions,
        seed: cfg.seed,
    };
    let client: Box<dyn LlmClient> = match cfg.backends.llm {
        Backend::Stub => Box::new(StubLlm::new(cfg.seed)),
        Backend::Real => Box::new(OpenAiClient::from_env().map_err(|e| CliError::Config(e.to_string()))?),
    };
    let mut runner = LlmRunner::new(client, llm);
    if cfg.backends.llm == Backend::Real {
        runner.retry = RetryPolicy {
            max_attempts: cfg.llm.max_attempts,
            ..RetryPolicy::default()
        };
        runner.limiter = TokenBucket::new(cfg.llm.rate, cfg.llm.rate.max(1.0));
    } else {
        runner.retry = RetryPolicy::immediate(1);
    }
    if let Some(dir) = &cfg.paths.llm_cache {
        runner.cache = Some(ResponseCache::open(dir.clone())?);
    }
    runner.log_dir = cfg.paths.llm_log.clone();
    Ok(runner)
}

/// Ingest, one LLM request per task, parse, then (optionally) filter.
pub fn cmd_gen_dataset(cfg: &PipelineConfig) -> Result<Outcome> {
    let ing = run_ingest(cfg)?;
    let runner = llm_runner(cfg)?;
    let scorer = if cfg.ablation.filter_dataset { Some(build_scorer(cfg)?) } else { None };
    let threshold = cfg.classifier.threshold;

    let results: Vec<std::result::Result<DatasetRecord, TaskFailure>> = ing
        .outcome
        .captioned
        .par_iter()
        .map(|ct: &CaptionedTask| {
            let id = ct.task_id().to_string();
            let fail = |stage, reason: String| TaskFailure {
                task_id: id.clone(),
                stage,
                reason,
            };
            let prompts = build_prompts_with_count(ct, cfg.ablation.include_address, cfg.llm.max_questions);
            let gen = runner.generate_raw(&id, &prompts).map_err(|e| fail("generate", e.to_string()))?;
            let parsed = parse_questions(&gen.response.text, cfg.llm.max_questions, &id)
                .map_err(|e| fail("parse", e.to_string()))?;
            let (questions, rejected) = match &scorer {
                Some(s) => locavqg_engage::filter(s.as_ref(), parsed, threshold),
                None => (parsed, Vec::new()),
            };
            Ok(DatasetRecord {
                captioned: ct.clone(),
                questions,
                rejected,
            })
        })
        .collect();

    let mut records = Vec::new();
    let mut failed = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(f) => {
                log::warn!("task {} failed at {}: {}", f.task_id, f.stage, f.reason);
                failed.push(f);
            }
        }
    }

    let scorer_id = scorer.as_ref().map_or_else(|| "none".to_string(), |s| s.id());
    let mut header = DatasetHeader::new(cfg.ablation.filter_dataset.then_some(threshold), scorer_id.clone());
    header.generator.insert("llm".into(), json!(runner.client.id()));
    header.generator.insert("llm_config".into(), serde_json::to_value(&runner.config).expect("serializes"));
    header.generator.insert("captioner".into(), json!(ing.report.captioner));
    header.generator.insert("geocoder".into(), json!(ing.report.geocoder));
    header.generator.insert("include_address".into(), json!(cfg.ablation.include_address));
    header.generator.insert("seed".into(), json!(cfg.seed));
    let dataset = Dataset { header, records };

    let kept: usize = dataset.records.iter().map(|r| r.questions.len()).sum();
    let rejected: usize = dataset.records.iter().map(|r| r.rejected.len()).sum();
    let report = GenerationReport {
        failed,
        records: dataset.records.len(),
        questions_generated: kept + rejected,
        questions_kept: kept,
        questions_rejected: rejected,
        filtered: cfg.ablation.filter_dataset,
        threshold: cfg.ablation.filter_dataset.then_some(threshold),
        scorer: scorer_id,
        ingest: ing.report,
    };
    let data_path = cfg.paths.dataset();
    let report_path = cfg.paths.out_dir.join("generation_report.json");
    write_json(&report_path, &report)?;
    if dataset.records.is_empty() {
        return Err(CliError::Failed(format!(
            "no task produced a record; see {}",
            report_path.display()
        )));
    }
    if let Some(p) = data_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(p).map_err(CliError::io(p))?;
    }
    dataset.write(&data_path)?;
    let status = if report.failed.is_empty() && status_of(&report.ingest) == Status::Success {
        Status::Success
    } else {
        Status::Partial
    };
    Ok(Outcome::new(status, vec![data_path, report_path]))
}
