use std::path::Path;

use locavqg_core::Scalar;
use locavqg_nn::ParamStore;
use serde::{Deserialize, Serialize};

use crate::error::{QgenError, Result};
use crate::model::{ModelConfig, Seq2Seq};
use crate::tokenizer::WordTokenizer;

pub const MODEL_FILE: &str = "model.json";
pub const TOKENIZER_FILE: &str = "tokenizer.json";
pub const RUN_MANIFEST_FILE: &str = "run_manifest.json";

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct ModelFile<T: Scalar> {
    format_version: u32,
    architecture: String,
    config: ModelConfig,
    tokenizer_id: String,
    params: ParamStore<T>,
}

fn write_json<V: Serialize>(path: &Path, v: &V) -> Result<()> {
    let bytes = serde_json::to_vec_pretty(v).map_err(|source| QgenError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    std::fs::write(path, bytes).map_err(|source| QgenError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_json<V: for<'de> Deserialize<'de>>(path: &Path) -> Result<V> {
    let bytes = std::fs::read(path).map_err(|source| QgenError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_slice(&bytes).map_err(|source| QgenError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes weights, tokenizer and run manifest into `dir`.
pub fn save_checkpoint<T: Scalar>(
    dir: &Path,
    model: &Seq2Seq<T>,
    tokenizer: &WordTokenizer,
    manifest: &serde_json::Value,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| QgenError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let file = ModelFile {
        format_version: 1,
        architecture: model.architecture_id(),
        config: model.config,
        tokenizer_id: model.tokenizer_id.clone(),
        params: model.params.clone(),
    };
    write_json(&dir.join(MODEL_FILE), &file)?;
    write_json(&dir.join(TOKENIZER_FILE), tokenizer)?;
    write_json(&dir.join(RUN_MANIFEST_FILE), manifest)
}

pub fn load_checkpoint<T: Scalar>(dir: &Path) -> Result<(Seq2Seq<T>, WordTokenizer, serde_json::Value)> {
    let file: ModelFile<T> = read_json(&dir.join(MODEL_FILE))?;
    let tokenizer: WordTokenizer = read_json(&dir.join(TOKENIZER_FILE))?;
    let manifest_path = dir.join(RUN_MANIFEST_FILE);
    let manifest = if manifest_path.exists() {
        read_json(&manifest_path)?
    } else {
        serde_json::Value::Null
    };
    if tokenizer.id() != file.tokenizer_id {
        return Err(QgenError::BadCheckpoint {
            path: dir.to_path_buf(),
            reason: format!(
                "model expects tokenizer {} but {TOKENIZER_FILE} is {}",
                file.tokenizer_id,
                tokenizer.id()
            ),
        });
    }
    if tokenizer.len() != file.config.vocab {
        return Err(QgenError::BadCheckpoint {
            path: dir.to_path_buf(),
            reason: format!("vocab {} vs tokenizer size {}", file.config.vocab, tokenizer.len()),
        });
    }
    let model = Seq2Seq::from_parts(file.config, file.tokenizer_id, file.params).map_err(|e| {
        QgenError::BadCheckpoint {
            path: dir.to_path_buf(),
            reason: e.to_string(),
        }
    })?;
    Ok((model, tokenizer, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Tier;
    use crate::tokenizer::BOS;

    #[test]
    fn round_trip() {
        let tok = WordTokenizer::build(["generate questions: a b c", "what is it ?"], 1, 100);
        let m = Seq2Seq::<f32>::new(ModelConfig::tier(Tier::Tiny, tok.len()), tok.id(), 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = serde_json::json!({"epochs": 20, "lr": 1e-4});
        save_checkpoint(dir.path(), &m, &tok, &manifest).unwrap();
        let (back, tok2, man2) = load_checkpoint::<f32>(dir.path()).unwrap();
        assert_eq!(tok2, tok);
        assert_eq!(man2, manifest);
        assert_eq!(back.logits(&[4, 5], &[BOS]), m.logits(&[4, 5], &[BOS]));
    }

    #[test]
    fn foreign_tokenizer_is_rejected() {
        let tok = WordTokenizer::build(["a b c"], 1, 100);
        let other = WordTokenizer::build(["x y z"], 1, 100);
        let m = Seq2Seq::<f32>::new(ModelConfig::tier(Tier::Tiny, tok.len()), tok.id(), 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_checkpoint(dir.path(), &m, &other, &serde_json::Value::Null).unwrap();
        assert!(matches!(
            load_checkpoint::<f32>(dir.path()),
            Err(QgenError::BadCheckpoint { .. })
        ));
    }
}
