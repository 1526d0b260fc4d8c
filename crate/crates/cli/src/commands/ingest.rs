use std::path::PathBuf;

use locavqg_core::{RetryPolicy, TokenBucket};
use locavqg_ingest::{
    ingest_tasks, load_manifest, CaptionerBackend, CaptionerHandle, Captioner, FlaggedTask, GeocodeCache,
    Geocoder, GoogleGeocoder, IngestContext, IngestOutcome, StubGeocoder,
};
use serde::Serialize;
use serde_json::json;

use super::{require, write_json, write_jsonl};
use crate::app::{Outcome, Status};
use crate::config::{Backend, PipelineConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize)]
pub struct RowFailure {
    pub line: usize,
    pub task_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct IngestReport {
    pub manifest_rows_rejected: Vec<RowFailure>,
    pub tasks: usize,
    pub captioned: usize,
    pub flagged: Vec<FlaggedTask>,
    pub geocoder: String,
    pub captioner: String,
}

pub struct Ingested {
    pub outcome: IngestOutcome,
    pub report: IngestReport,
}

fn geocoder(cfg: &PipelineConfig) -> Result<Box<dyn Geocoder>> {
    match cfg.backends.geocoder {
        Backend::Stub => Ok(Box::new(StubGeocoder::constant(cfg.ingest.stub_address.clone()))),
        Backend::Real => GoogleGeocoder::from_env()
            .map(|g| Box::new(g) as Box<dyn Geocoder>)
            .map_err(|e| CliError::Config(e.to_string())),
    }
}

fn captioner(cfg: &PipelineConfig) -> Result<Box<dyn Captioner>> {
    let handle = CaptionerHandle {
        backend: match cfg.backends.captioner {
            Backend::Stub => CaptionerBackend::Stub,
            Backend::Real => CaptionerBackend::RemoteModel,
        },
        config: json!({
            "base_dir": cfg.paths.image_dir,
            "endpoint": cfg.backends.captioner_endpoint,
        }),
    };
    Ok(handle.build()?)
}

/// Loads the manifest, geocodes (through the persistent cache) and captions.
pub fn run_ingest(cfg: &PipelineConfig) -> Result<Ingested> {
    require(&cfg.paths.manifest, "task manifest", "ingest (supply paths.manifest)")?;
    let load = load_manifest(&cfg.paths.manifest)?;
    let geo = geocoder(cfg)?;
    let cap = captioner(cfg)?;
    let cache = GeocodeCache::open(cfg.paths.geocode_cache())?;
    let (retry, limiter) = match cfg.backends.geocoder {
        Backend::Stub => (RetryPolicy::immediate(1), TokenBucket::unlimited()),
        Backend::Real => (
            RetryPolicy {
                max_attempts: cfg.ingest.max_attempts,
                ..RetryPolicy::default()
            },
            TokenBucket::new(cfg.ingest.geocode_rate, cfg.ingest.geocode_rate.max(1.0)),
        ),
    };
    let ctx = IngestContext {
        geocoder: geo.as_ref(),
        cache: &cache,
        captioner: cap.as_ref(),
        retry,
        geocode_limiter: &limiter,
        workers: cfg.workers,
        cities: cfg.ingest.cities.clone(),
    };
    let outcome = ingest_tasks(&load.tasks, &ctx);
    cache.save()?;
    let report = IngestReport {
        manifest_rows_rejected: load
            .row_errors
            .iter()
            .map(|r| RowFailure {
                line: r.line,
                task_id: r.task_id.clone(),
                reason: r.reason.clone(),
            })
            .collect(),
        tasks: load.tasks.len(),
        captioned: outcome.captioned.len(),
        flagged: outcome.flagged.clone(),
        geocoder: geo.id(),
        captioner: cap.id(),
    };
    Ok(Ingested { outcome, report })
}

pub fn status_of(report: &IngestReport) -> Status {
    if report.flagged.is_empty() && report.manifest_rows_rejected.is_empty() {
        Status::Success
    } else {
        Status::Partial
    }
}

pub fn cmd_ingest(cfg: &PipelineConfig) -> Result<Outcome> {
    let ing = run_ingest(cfg)?;
    let captioned = cfg.paths.out_dir.join("captioned.jsonl");
    let report = cfg.paths.out_dir.join("ingest_report.json");
    write_jsonl(&captioned, &ing.outcome.captioned)?;
    write_json(&report, &ing.report)?;
    if ing.outcome.captioned.is_empty() {
        return Err(CliError::Failed(format!(
            "no task survived ingest ({} flagged, {} manifest rows rejected)",
            ing.report.flagged.len(),
            ing.report.manifest_rows_rejected.len()
        )));
    }
    let outputs: Vec<PathBuf> = vec![captioned, report, cfg.paths.geocode_cache()];
    Ok(Outcome::new(status_of(&ing.report), outputs))
}
