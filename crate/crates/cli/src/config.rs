//! Pipeline configuration, read from TOML and patched by `--set` flags.
//! Secrets never live here: remote backends read their keys from the
//! environment, and unknown keys (such as an `api_key`) are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Thread cap; 0 lets the runtime decide.
    pub workers: usize,
    pub paths: Paths,
    pub backends: Backends,
    pub ablation: Ablation,
    pub ingest: IngestParams,
    pub llm: LlmParams,
    pub classifier: ClassifierParams,
    pub train: TrainParams,
    pub distill: DistillParams,
    pub infer: InferParams,
    pub bench: BenchParams,
    pub stats: StatsParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub manifest: PathBuf,
    pub image_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub geocode_cache: Option<PathBuf>,
    pub llm_cache: Option<PathBuf>,
    pub llm_log: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub classifier: Option<PathBuf>,
    pub checkpoints: Option<PathBuf>,
    /// One question per line; engaging class.
    pub engaging_questions: Option<PathBuf>,
    /// One question per line; factoid class.
    pub factoid_questions: Option<PathBuf>,
    pub abstract_lexicon: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    /// `word<TAB>depth[,depth]` noun depth table.
    pub hierarchy: Option<PathBuf>,
    /// `sentence<TAB>bracketed tree` parses from an external parser.
    pub parses: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            manifest: "manifest.csv".into(),
            image_dir: None,
            out_dir: "runs".into(),
            geocode_cache: None,
            llm_cache: None,
            llm_log: None,
            dataset: None,
            classifier: None,
            checkpoints: None,
            engaging_questions: None,
            factoid_questions: None,
            abstract_lexicon: None,
            stopwords: None,
            hierarchy: None,
            parses: None,
        }
    }
}

impl Paths {
    pub fn dataset(&self) -> PathBuf {
        self.dataset.clone().unwrap_or_else(|| self.out_dir.join("dataset.jsonl"))
    }

    pub fn geocode_cache(&self) -> PathBuf {
        self.geocode_cache.clone().unwrap_or_else(|| self.out_dir.join("geocode_cache.tsv"))
    }

    pub fn classifier(&self) -> PathBuf {
        self.classifier.clone().unwrap_or_else(|| self.out_dir.join("classifier"))
    }

    pub fn checkpoints(&self) -> PathBuf {
        self.checkpoints.clone().unwrap_or_else(|| self.out_dir.join("checkpoints"))
    }

    pub fn predictions(&self) -> PathBuf {
        self.out_dir.join("predictions.jsonl")
    }

    pub fn runs(&self) -> PathBuf {
        self.out_dir.join("runs")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Real,
    Stub,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    /// Trained classifier checkpoint at `paths.classifier`.
    Classifier,
    /// Keyword-cue stub.
    Cue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Backends {
    pub llm: Backend,
    pub captioner: Backend,
    pub captioner_endpoint: Option<String>,
    pub geocoder: Backend,
    pub scorer: ScorerKind,
    /// Embedding metrics encoder; `real` is unavailable offline.
    pub encoder: Backend,
}

impl Default for Backends {
    fn default() -> Self {
        Self {
            llm: Backend::Stub,
            captioner: Backend::Stub,
            captioner_endpoint: None,
            geocoder: Backend::Stub,
            scorer: ScorerKind::Cue,
            encoder: Backend::Stub,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ablation {
    pub include_address: bool,
    pub filter_dataset: bool,
    pub filter_inference: bool,
    pub dataset_fraction: f64,
}

impl Default for Ablation {
    fn default() -> Self {
        Self {
            include_address: true,
            filter_dataset: true,
            filter_inference: true,
            dataset_fraction: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestParams {
    pub cities: Vec<String>,
    /// Geocoder requests per second.
    pub geocode_rate: f64,
    pub max_attempts: u32,
    /// Address template for the stub geocoder (`{lat}`, `{lon}`).
    pub stub_address: String,
}

impl Default for IngestParams {
    fn default() -> Self {
        Self {
            cities: vec!["Pittsburgh".into(), "New York".into(), "San Francisco".into()],
            geocode_rate: 40.0,
            max_attempts: 3,
            stub_address: "{lat}, {lon}, Pittsburgh, PA, USA".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmParams {
    pub model: String,
    pub temperature: f64,
    pub presence_penalty: f64,
    pub max_questions: usize,
    /// Requests per second.
    pub rate: f64,
    pub max_attempts: u32,
}

impl Default for LlmParams {
    fn default() -> Self {
        Self {
            model: "gpt-4".into(),
            temperature: 0.7,
            presence_penalty: 0.1,
            max_questions: 10,
            rate: 3.0,
            max_attempts: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierParams {
    pub backend: locavqg_engage::ClassifierBackend,
    pub epochs: usize,
    /// Defaults per backend when unset.
    pub lr: Option<f64>,
    pub batch_size: usize,
    pub threshold: f64,
    /// Questions per class in the synthetic corpus when no real corpus is given.
    pub synthetic_size: usize,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        Self {
            backend: locavqg_engage::ClassifierBackend::Lexical,
            epochs: 3,
            lr: None,
            batch_size: 32,
            threshold: locavqg_core::DEFAULT_THRESHOLD,
            synthetic_size: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainParams {
    pub tier: locavqg_qgen::Tier,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub clip_norm: Option<f64>,
    pub questions_per_task: usize,
    pub val_fraction: f64,
    pub min_count: usize,
    pub max_vocab: usize,
    /// Sweep of dataset fractions; empty means `ablation.dataset_fraction` only.
    pub fractions: Vec<f64>,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            tier: locavqg_qgen::Tier::Base,
            epochs: 20,
            lr: 1e-3,
            batch_size: 16,
            clip_norm: Some(1.0),
            questions_per_task: 5,
            val_fraction: 0.1,
            min_count: 1,
            max_vocab: 8000,
            fractions: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistillParams {
    pub teacher: Option<PathBuf>,
    pub student_tier: locavqg_qgen::Tier,
    pub alpha: f64,
    pub temperature: f64,
    pub sequence_level: bool,
}

impl Default for DistillParams {
    fn default() -> Self {
        Self {
            teacher: None,
            student_tier: locavqg_qgen::Tier::Tiny,
            alpha: 0.5,
            temperature: 2.0,
            sequence_level: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferParams {
    pub checkpoint: Option<PathBuf>,
    pub greedy: bool,
    pub top_p: f64,
    pub temperature: f64,
    pub max_len: usize,
    pub max_attempts: usize,
}

impl Default for InferParams {
    fn default() -> Self {
        Self {
            checkpoint: None,
            greedy: false,
            top_p: 0.9,
            temperature: 1.0,
            max_len: 48,
            max_attempts: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchParams {
    pub trials: usize,
    pub warmup: usize,
    /// Sleep of the stub model, in milliseconds.
    pub stub_ms: u64,
}

impl Default for BenchParams {
    fn default() -> Self {
        Self {
            trials: 300,
            warmup: 3,
            stub_ms: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsParams {
    pub cosine_sample: usize,
    pub top_types: usize,
    pub top_words: usize,
}

impl Default for StatsParams {
    fn default() -> Self {
        Self {
            cosine_sample: 1000,
            top_types: 15,
            top_words: 20,
        }
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: 0,
            paths: Paths::default(),
            backends: Backends::default(),
            ablation: Ablation::default(),
            ingest: IngestParams::default(),
            llm: LlmParams::default(),
            classifier: ClassifierParams::default(),
            train: TrainParams::default(),
            distill: DistillParams::default(),
            infer: InferParams::default(),
            bench: BenchParams::default(),
            stats: StatsParams::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path` (when given) and applies `key.path=value` overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        let mut doc: toml::Table = toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: Self = toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let f = self.ablation.dataset_fraction;
        if !(f > 0.0 && f <= 1.0) {
            return Err(CliError::Config(format!("ablation.dataset_fraction must lie in (0, 1], got {f}")));
        }
        if let Some(bad) = self.train.fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
            return Err(CliError::Config(format!("train.fractions entries must lie in (0, 1], got {bad}")));
        }
        if !(0.0..1.0).contains(&self.train.val_fraction) {
            return Err(CliError::Config("train.val_fraction must lie in [0, 1)".into()));
        }
        if self.infer.max_attempts == 0 || self.bench.trials == 0 {
            return Err(CliError::Config("infer.max_attempts and bench.trials must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.classifier.threshold) {
            return Err(CliError::Config("classifier.threshold must lie in [0, 1]".into()));
        }
        if self.backends.captioner == Backend::Real && self.backends.captioner_endpoint.is_none() {
            return Err(CliError::Config("a real captioner needs backends.captioner_endpoint".into()));
        }
        Ok(())
    }

    /// Fractions trained by `train`.
    pub fn fractions(&self) -> Vec<f64> {
        if self.train.fractions.is_empty() {
            vec![self.ablation.dataset_fraction]
        } else {
            self.train.fractions.clone()
        }
    }
}

/// Applies `a.b.c=value`; the value is parsed as TOML and falls back to a string.
pub fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got {spec:?}")))?;
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, parents) = parts.split_last().expect("split yields one part");
    let mut table = doc;
    for p in parents {
        let entry = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Usage(format!("--set {key}: {p} is not a table")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = PipelineConfig::default();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(PipelineConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn overrides_patch_nested_keys() {
        let c = PipelineConfig::load(
            None,
            &[
                "seed=7".into(),
                "ablation.include_address=false".into(),
                "paths.out_dir=/tmp/x".into(),
                "train.fractions=[0.5, 1.0]".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.seed, 7);
        assert!(!c.ablation.include_address);
        assert_eq!(c.paths.out_dir, PathBuf::from("/tmp/x"));
        assert_eq!(c.fractions(), vec![0.5, 1.0]);
    }

    #[test]
    fn secrets_and_bad_values_are_rejected() {
        assert!(PipelineConfig::from_toml("[llm]\napi_key = \"sk-123\"\n").is_err());
        let e = PipelineConfig::from_toml("[ablation]\ndataset_fraction = 0.0\n").unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(PipelineConfig::load(None, &["novalue".into()]).is_err());
    }
}
