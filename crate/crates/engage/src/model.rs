use std::fmt;
use std::path::Path;
use std::str::FromStr;

use locavqg_core::{EngagementScorer, Scalar, DEFAULT_THRESHOLD};
use locavqg_nn::{Graph, ParamId, ParamStore, Tensor, Var};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EngageError, Result};
use crate::features::hashed_ngrams;

/// Classifier architectures trainable from scratch.
///
/// Neither is the pretrained transformer encoder; both stand in for it when
/// no encoder checkpoint is available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierBackend {
    /// Logistic regression over hashed unigram/bigram features.
    Lexical,
    /// Mean-pooled hashed n-gram embeddings followed by a tanh hidden layer.
    BagOfEmbeddings,
}

impl ClassifierBackend {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierBackend::Lexical => "lexical",
            ClassifierBackend::BagOfEmbeddings => "bag-of-embeddings",
        }
    }
}

impl fmt::Display for ClassifierBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierBackend {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lexical" => Ok(ClassifierBackend::Lexical),
            "bag-of-embeddings" | "embeddings" => Ok(ClassifierBackend::BagOfEmbeddings),
            other => Err(format!(
                "unknown classifier backend {other:?} (expected lexical or bag-of-embeddings)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub backend: ClassifierBackend,
    pub buckets: usize,
    pub dim: usize,
    pub hidden: usize,
    pub max_tokens: usize,
}

impl ModelSpec {
    pub fn for_backend(backend: ClassifierBackend) -> Self {
        let buckets = match backend {
            ClassifierBackend::Lexical => 1 << 16,
            ClassifierBackend::BagOfEmbeddings => 1 << 12,
        };
        Self {
            backend,
            buckets,
            dim: 32,
            hidden: 32,
            max_tokens: 64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.buckets == 0 || self.dim == 0 || self.hidden == 0 || self.max_tokens == 0 {
            return Err(EngageError::InvalidConfig(format!(
                "model dimensions must be positive: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn encoder_id(&self) -> String {
        match self.backend {
            ClassifierBackend::Lexical => {
                format!("scratch:lexical-ngram:b{}:t{}", self.buckets, self.max_tokens)
            }
            ClassifierBackend::BagOfEmbeddings => format!(
                "scratch:bag-of-embeddings:b{}:d{}:h{}:t{}",
                self.buckets, self.dim, self.hidden, self.max_tokens
            ),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Ids {
    table: ParamId,
    bias: ParamId,
    hidden: Option<(ParamId, ParamId, ParamId)>,
}

/// Binary engaging-question classifier.
#[derive(Debug, Clone)]
pub struct ClassifierModel<T: Scalar> {
    pub spec: ModelSpec,
    pub threshold: f64,
    pub params: ParamStore<T>,
    ids: Ids,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct Checkpoint<T: Scalar> {
    format_version: u32,
    encoder_id: String,
    spec: ModelSpec,
    threshold: f64,
    params: ParamStore<T>,
}

pub const CHECKPOINT_FILE: &str = "classifier.json";

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of logit `z` against `y`, computed without overflow.
pub(crate) fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

impl<T: Scalar> ClassifierModel<T> {
    pub fn new(spec: ModelSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamStore::new();
        let ids = match spec.backend {
            ClassifierBackend::Lexical => Ids {
                table: params.add_zeros("weights", spec.buckets, 1),
                bias: params.add_zeros("bias", 1, 1),
                hidden: None,
            },
            ClassifierBackend::BagOfEmbeddings => {
                let table = params.add_uniform("embed", spec.buckets, spec.dim, 3 * spec.dim, &mut rng);
                let w1 = params.add_uniform("hidden.w", spec.dim, spec.hidden, spec.dim, &mut rng);
                let b1 = params.add_zeros("hidden.b", 1, spec.hidden);
                let w2 = params.add_uniform("out.w", spec.hidden, 1, spec.hidden, &mut rng);
                let bias = params.add_zeros("out.b", 1, 1);
                Ids {
                    table,
                    bias,
                    hidden: Some((w1, b1, w2)),
                }
            }
        };
        Ok(Self {
            spec,
            threshold: DEFAULT_THRESHOLD,
            params,
            ids,
        })
    }

    fn ids_for(spec: &ModelSpec) -> Ids {
        match spec.backend {
            ClassifierBackend::Lexical => Ids {
                table: ParamId(0),
                bias: ParamId(1),
                hidden: None,
            },
            ClassifierBackend::BagOfEmbeddings => Ids {
                table: ParamId(0),
                bias: ParamId(4),
                hidden: Some((ParamId(1), ParamId(2), ParamId(3))),
            },
        }
    }

    pub fn encoder_id(&self) -> String {
        self.spec.encoder_id()
    }

    pub fn features(&self, text: &str) -> Vec<usize> {
        hashed_ngrams(text, self.spec.buckets, self.spec.max_tokens)
    }

    /// Builds the forward pass for one question and returns its logit node.
    pub(crate) fn forward(&self, g: &mut Graph<'_, T>, feats: &[usize]) -> Var {
        let table = g.param(self.ids.table);
        let rows = g.gather(table, feats);
        let pooled = g.mean_rows(rows);
        let bias = g.param(self.ids.bias);
        match self.ids.hidden {
            None => g.add_row(pooled, bias),
            Some((w1, b1, w2)) => {
                let w1 = g.param(w1);
                let b1 = g.param(b1);
                let h = g.matmul(pooled, w1);
                let h = g.add_row(h, b1);
                let h = g.tanh(h);
                let w2 = g.param(w2);
                let z = g.matmul(h, w2);
                g.add_row(z, bias)
            }
        }
    }

    pub fn logit(&self, text: &str) -> f64 {
        let feats = self.features(text);
        let mut g = Graph::new(&self.params);
        let z = self.forward(&mut g, &feats);
        g.value(z).get(0, 0).as_f64()
    }

    /// Probability that `text` is engaging.
    pub fn probability(&self, text: &str) -> f64 {
        sigmoid(self.logit(text))
    }

    pub fn predict(&self, text: &str) -> bool {
        self.probability(text) >= self.threshold
    }

    /// Loss and parameter gradients for one example; the seed is `scale`·dL/dz.
    pub(crate) fn example_grad(
        &self,
        text: &str,
        target: f64,
        scale: f64,
    ) -> (f64, locavqg_nn::GradBuffer<T>) {
        let feats = self.features(text);
        let mut g = Graph::new(&self.params);
        let z = self.forward(&mut g, &feats);
        let zf = g.value(z).get(0, 0).as_f64();
        let loss = bce_with_logit(zf, target);
        let seed = Tensor::from_vec(1, 1, vec![T::of((sigmoid(zf) - target) * scale)]);
        (loss, g.backward(z, seed))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|source| EngageError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = dir.join(CHECKPOINT_FILE);
        let ck = Checkpoint {
            format_version: 1,
            encoder_id: self.encoder_id(),
            spec: self.spec,
            threshold: self.threshold,
            params: self.params.clone(),
        };
        let bytes = serde_json::to_vec(&ck).map_err(|source| EngageError::Json {
            path: path.clone(),
            source,
        })?;
        std::fs::write(&path, bytes).map_err(|source| EngageError::Io { path, source })
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(CHECKPOINT_FILE);
        let bytes = std::fs::read(&path).map_err(|source| EngageError::Io {
            path: path.clone(),
            source,
        })?;
        let ck: Checkpoint<T> = serde_json::from_slice(&bytes).map_err(|source| EngageError::Json {
            path: path.clone(),
            source,
        })?;
        ck.spec.validate()?;
        let expected = Self::new(ck.spec, 0)?;
        let shapes_match = expected.params.len() == ck.params.len()
            && expected
                .params
                .ids()
                .all(|id| expected.params.get(id).shape() == ck.params.get(id).shape());
        if !shapes_match {
            return Err(EngageError::Malformed {
                path,
                line: 1,
                reason: "parameter shapes do not match the model spec".into(),
            });
        }
        if !(ck.threshold > 0.0 && ck.threshold < 1.0) {
            return Err(EngageError::InvalidConfig(format!(
                "threshold must lie in (0, 1), got {}",
                ck.threshold
            )));
        }
        Ok(Self {
            spec: ck.spec,
            threshold: ck.threshold,
            params: ck.params,
            ids: Self::ids_for(&ck.spec),
        })
    }
}

impl<T: Scalar> EngagementScorer for ClassifierModel<T> {
    fn score(&self, text: &str) -> f64 {
        self.probability(text)
    }

    fn id(&self) -> String {
        self.encoder_id()
    }
}
