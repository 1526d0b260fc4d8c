pub mod bench;
pub mod classifier;
pub mod dataset;
pub mod eval;
pub mod infer;
pub mod ingest;
pub mod stats;
pub mod train;

use std::path::{Path, PathBuf};

use locavqg_core::{Dataset, EngagementScorer};
use locavqg_engage::{ClassifierModel32, CueScorer};
use serde::Serialize;

use crate::config::{PipelineConfig, ScorerKind};
use crate::error::{CliError, Result};

/// Fails with an actionable message when an upstream artifact is missing.
pub fn require(path: &Path, what: &'static str, producer: &'static str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::MissingArtifact {
            what,
            path: path.to_path_buf(),
            producer,
        })
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(p) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(p).map_err(CliError::io(p))?;
    }
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    let body = serde_json::to_string_pretty(value).expect("value serializes") + "\n";
    std::fs::write(path, body).map_err(CliError::io(path))
}

/// One compact JSON value per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    ensure_parent(path)?;
    let mut body = String::new();
    for it in items {
        body.push_str(&serde_json::to_string(it).expect("value serializes"));
        body.push('\n');
    }
    std::fs::write(path, body).map_err(CliError::io(path))
}

pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CliError::Failed(format!("{}: line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    require(path, "dataset file", "gen-dataset")?;
    Ok(Dataset::read(path)?)
}

/// The configured engagingness scorer.
pub fn build_scorer(cfg: &PipelineConfig) -> Result<Box<dyn EngagementScorer>> {
    match cfg.backends.scorer {
        ScorerKind::Cue => Ok(Box::new(CueScorer::default())),
        ScorerKind::Classifier => {
            let dir = cfg.paths.classifier();
            require(&dir.join(locavqg_engage::CHECKPOINT_FILE), "classifier checkpoint", "train-classifier")?;
            Ok(Box::new(ClassifierModel32::load(&dir)?))
        }
    }
}

pub fn out(cfg: &PipelineConfig, explicit: Option<&Path>, default_name: &str) -> PathBuf {
    explicit.map(Path::to_path_buf).unwrap_or_else(|| cfg.paths.out_dir.join(default_name))
}
