use std::collections::{BTreeMap, BTreeSet};

use locavqg_core::{infer_city, CaptionedTask, LocaVQGTask, RetryPolicy, TokenBucket};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caption::{caption_images, Captioner};
use crate::error::IngestError;
use crate::geocode::{reverse_geocode, CacheKey, GeocodeCache, Geocoder};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "flag")]
pub enum FlagReason {
    Ungeocoded { reason: String },
    Uncaptioned { direction: String, reason: String },
}

/// A task excluded from downstream processing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlaggedTask {
    pub task_id: String,
    #[serde(flatten)]
    pub reason: FlagReason,
}

#[derive(Debug, Clone, Default)]
pub struct IngestOutcome {
    pub captioned: Vec<CaptionedTask>,
    pub flagged: Vec<FlaggedTask>,
}

pub struct IngestContext<'a> {
    pub geocoder: &'a dyn Geocoder,
    pub cache: &'a GeocodeCache,
    pub captioner: &'a dyn Captioner,
    pub retry: RetryPolicy,
    pub geocode_limiter: &'a TokenBucket,
    pub workers: usize,
    /// Candidate city names for filling `LocaVQGTask::city` from the address.
    pub cities: Vec<String>,
}

/// Geocodes and captions `tasks` in parallel.
///
/// Distinct rounded coordinates are geocoded once each before captioning,
/// so the client sees at most one call per distinct coordinate. Output order
/// follows input order.
pub fn ingest_tasks(tasks: &[LocaVQGTask], ctx: &IngestContext<'_>) -> IngestOutcome {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.workers.max(1))
        .build()
        .expect("thread pool");

    pool.install(|| {
        let mut distinct: BTreeMap<CacheKey, locavqg_core::GeoCoordinate> = BTreeMap::new();
        for t in tasks {
            distinct.entry(CacheKey::of(t.coordinate)).or_insert(t.coordinate);
        }
        let coords: Vec<_> = distinct.into_iter().collect();
        let addresses: BTreeMap<CacheKey, Result<String, String>> = coords
            .par_iter()
            .map(|(k, c)| {
                let r = reverse_geocode(*c, ctx.cache, ctx.geocoder, &ctx.retry, ctx.geocode_limiter)
                    .map_err(|e| e.to_string());
                (*k, r)
            })
            .collect();

        let results: Vec<Result<CaptionedTask, FlaggedTask>> = tasks
            .par_iter()
            .map(|t| {
                let address = match &addresses[&CacheKey::of(t.coordinate)] {
                    Ok(a) => a.clone(),
                    Err(reason) => {
                        return Err(FlaggedTask {
                            task_id: t.task_id.clone(),
                            reason: FlagReason::Ungeocoded {
                                reason: reason.clone(),
                            },
                        })
                    }
                };
                let captions = caption_images(t, ctx.captioner, &ctx.retry).map_err(|e| {
                    let reason = match e {
                        IngestError::Uncaptioned { direction, reason } => FlagReason::Uncaptioned {
                            direction: direction.to_string(),
                            reason,
                        },
                        other => FlagReason::Uncaptioned {
                            direction: String::new(),
                            reason: other.to_string(),
                        },
                    };
                    FlaggedTask {
                        task_id: t.task_id.clone(),
                        reason,
                    }
                })?;
                let mut task = t.clone();
                if task.city.is_none() {
                    task.city = infer_city(&address, &ctx.cities);
                }
                Ok(CaptionedTask {
                    task,
                    captions,
                    address,
                })
            })
            .collect();

        let mut out = IngestOutcome::default();
        for r in results {
            match r {
                Ok(ct) => out.captioned.push(ct),
                Err(f) => {
                    log::warn!("task {} excluded: {:?}", f.task_id, f.reason);
                    out.flagged.push(f)
                }
            }
        }
        out
    })
}

/// Task ids that survive ingestion: the input ids minus the flagged ones.
pub fn surviving_ids(tasks: &[LocaVQGTask], outcome: &IngestOutcome) -> BTreeSet<String> {
    let flagged: BTreeSet<&str> = outcome.flagged.iter().map(|f| f.task_id.as_str()).collect();
    tasks
        .iter()
        .map(|t| t.task_id.as_str())
        .filter(|id| !flagged.contains(id))
        .map(str::to_string)
        .collect()
}
