use locavqg_core::text::tokenize;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{MetricsError, Result};

/// A metric value, or the reason it could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricValue {
    Value(f64),
    Unavailable(String),
}

impl MetricValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            MetricValue::Value(v) => Some(*v),
            MetricValue::Unavailable(_) => None,
        }
    }
}

/// Contextual token embeddings, as used by greedy-matching scores.
pub trait TokenEncoder: Send + Sync {
    fn encode_tokens(&self, tokens: &[String]) -> Vec<Vec<f64>>;
    fn id(&self) -> String;
}

/// Fixed-length sentence embeddings.
pub trait SentenceEncoder: Send + Sync {
    fn encode(&self, text: &str) -> Vec<f64>;
    fn id(&self) -> String;
}

/// Deterministic pseudo-random unit vector per token (no context).
#[derive(Debug, Clone)]
pub struct HashedEncoder {
    pub dim: usize,
}

impl Default for HashedEncoder {
    fn default() -> Self {
        Self { dim: 64 }
    }
}

impl HashedEncoder {
    pub fn token_vector(&self, token: &str) -> Vec<f64> {
        let digest = Sha256::digest(token.as_bytes());
        let seed = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..self.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / n).collect()
    }
}

impl TokenEncoder for HashedEncoder {
    fn encode_tokens(&self, tokens: &[String]) -> Vec<Vec<f64>> {
        tokens.iter().map(|t| self.token_vector(t)).collect()
    }

    fn id(&self) -> String {
        format!("stub-hashed-token:d{}", self.dim)
    }
}

impl SentenceEncoder for HashedEncoder {
    /// Mean of the token vectors.
    fn encode(&self, text: &str) -> Vec<f64> {
        let toks = tokenize(text);
        let mut out = vec![0.0; self.dim];
        for t in &toks {
            for (o, x) in out.iter_mut().zip(self.token_vector(t)) {
                *o += x;
            }
        }
        let n = toks.len().max(1) as f64;
        out.iter_mut().for_each(|x| *x /= n);
        out
    }

    fn id(&self) -> String {
        format!("stub-hashed-mean:d{}", self.dim)
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Greedy-matching F1 between candidate and one reference.
fn greedy_f1(c: &[Vec<f64>], r: &[Vec<f64>]) -> f64 {
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let sim: Vec<Vec<f64>> = c.iter().map(|x| r.iter().map(|y| cosine(x, y)).collect()).collect();
    let p = sim.iter().map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max)).sum::<f64>() / c.len() as f64;
    let rec = (0..r.len())
        .map(|j| sim.iter().map(|row| row[j]).fold(f64::NEG_INFINITY, f64::max))
        .sum::<f64>()
        / r.len() as f64;
    if p + rec <= 0.0 {
        0.0
    } else {
        2.0 * p * rec / (p + rec)
    }
}

pub enum EmbeddingBackend<'a> {
    /// Greedy-matching F1 over the given token encoder.
    BertScore(&'a dyn TokenEncoder),
    /// Learned regression metric; `None` when no checkpoint is installed.
    Bleurt(Option<&'a dyn Fn(&str, &str) -> f64>),
}

impl EmbeddingBackend<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            EmbeddingBackend::BertScore(_) => "bertscore",
            EmbeddingBackend::Bleurt(_) => "bleurt",
        }
    }

    pub fn checkpoint_id(&self) -> String {
        match self {
            EmbeddingBackend::BertScore(e) => e.id(),
            EmbeddingBackend::Bleurt(Some(_)) => "bleurt:external".into(),
            EmbeddingBackend::Bleurt(None) => "none".into(),
        }
    }
}

/// Multi-reference score (maximum over references).
pub fn embedding_score(candidate: &str, references: &[&str], backend: &EmbeddingBackend<'_>) -> Result<MetricValue> {
    if references.is_empty() {
        return Err(MetricsError::NoReferences);
    }
    match backend {
        EmbeddingBackend::BertScore(enc) => {
            let c = enc.encode_tokens(&tokenize(candidate));
            let best = references
                .iter()
                .map(|r| greedy_f1(&c, &enc.encode_tokens(&tokenize(r))))
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(MetricValue::Value(best))
        }
        EmbeddingBackend::Bleurt(Some(f)) => Ok(MetricValue::Value(
            references.iter().map(|r| f(candidate, r)).fold(f64::NEG_INFINITY, f64::max),
        )),
        EmbeddingBackend::Bleurt(None) => Ok(MetricValue::Unavailable("no bleurt checkpoint installed".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_similarity_dominates() {
        let enc = HashedEncoder::default();
        let b = EmbeddingBackend::BertScore(&enc);
        let r = "What festivals take place in this park?";
        let own = embedding_score(r, &[r], &b).unwrap().value().unwrap();
        assert!((own - 1.0).abs() < 1e-9);
        for c in ["What events happen in this park?", "Who built the bridge?", "park"] {
            assert!(embedding_score(c, &[r], &b).unwrap().value().unwrap() <= own);
        }
    }

    #[test]
    fn reference_order_does_not_matter() {
        let enc = HashedEncoder::default();
        let b = EmbeddingBackend::BertScore(&enc);
        let refs = ["a tall tower", "the old market", "what is that"];
        let mut rev = refs;
        rev.reverse();
        assert_eq!(
            embedding_score("the tall market", &refs, &b).unwrap(),
            embedding_score("the tall market", &rev, &b).unwrap()
        );
    }

    #[test]
    fn missing_checkpoint_is_marked() {
        let v = embedding_score("a", &["a"], &EmbeddingBackend::Bleurt(None)).unwrap();
        assert!(matches!(v, MetricValue::Unavailable(_)));
        assert_eq!(v.value(), None);
    }

    #[test]
    fn cosine_basics() {
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 2.0]), 0.0);
        assert!((cosine(&[1.0, 1.0], &[2.0, 2.0]) - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), 0.0);
    }
}
