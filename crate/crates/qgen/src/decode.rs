use locavqg_core::{CaptionedTask, Question, QuestionSource, Scalar};
use locavqg_nn::{softmax, Graph};
use locavqg_promptgen::generation_input;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{QgenError, Result};
use crate::model::Seq2Seq;
use crate::tokenizer::{WordTokenizer, BOS, EOS, PAD, UNK};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "strategy")]
pub enum Strategy {
    Greedy,
    /// Sample from the smallest set of tokens whose mass reaches `top_p`.
    Nucleus { top_p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeConfig {
    #[serde(flatten)]
    pub strategy: Strategy,
    pub temperature: f64,
    /// Cap on generated tokens; the model's `max_tgt` also applies.
    pub max_len: usize,
    pub seed: u64,
}

impl DecodeConfig {
    pub fn greedy() -> Self {
        Self {
            strategy: Strategy::Greedy,
            temperature: 1.0,
            max_len: 48,
            seed: 0,
        }
    }

    pub fn nucleus(top_p: f64, seed: u64) -> Self {
        Self {
            strategy: Strategy::Nucleus { top_p },
            seed,
            ..Self::greedy()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Strategy::Nucleus { top_p } = self.strategy {
            if !(top_p > 0.0 && top_p <= 1.0) {
                return Err(QgenError::InvalidConfig(format!("top_p must lie in (0, 1], got {top_p}")));
            }
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) || self.max_len == 0 {
            return Err(QgenError::InvalidConfig(format!("bad decode config {self:?}")));
        }
        Ok(())
    }
}

impl Default for DecodeConfig {
    /// Nucleus sampling with `top_p = 0.9`.
    fn default() -> Self {
        Self::nucleus(0.9, 0)
    }
}

fn pick<R: Rng>(logits: &[f64], cfg: &DecodeConfig, rng: &mut R) -> usize {
    // never emit <pad>, <bos> or <unk>
    let banned = |k: usize| k == PAD || k == BOS || k == UNK;
    match cfg.strategy {
        Strategy::Greedy => {
            let mut best = EOS;
            for (k, &v) in logits.iter().enumerate() {
                if !banned(k) && v > logits[best] {
                    best = k;
                }
            }
            best
        }
        Strategy::Nucleus { top_p } => {
            let scaled: Vec<f64> = logits
                .iter()
                .enumerate()
                .map(|(k, &v)| if banned(k) { f64::NEG_INFINITY } else { v / cfg.temperature })
                .collect();
            let probs = softmax(&scaled);
            let mut order: Vec<usize> = (0..probs.len()).collect();
            order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
            let mut kept = Vec::new();
            let mut mass = 0.0;
            for k in order {
                kept.push(k);
                mass += probs[k];
                if mass >= top_p {
                    break;
                }
            }
            let mut u = rng.gen::<f64>() * mass;
            for &k in &kept {
                u -= probs[k];
                if u <= 0.0 {
                    return k;
                }
            }
            *kept.last().expect("non-empty nucleus")
        }
    }
}

/// Autoregressively decodes from `src`; the returned ids exclude `<eos>`.
pub fn generate_ids<T: Scalar, R: Rng>(model: &Seq2Seq<T>, src: &[usize], cfg: &DecodeConfig, rng: &mut R) -> Vec<usize> {
    let memory = {
        let mut g = Graph::new(&model.params);
        let m = model.encode(&mut g, src);
        g.value(m).clone()
    };
    let limit = cfg.max_len.min(model.config.max_tgt);
    let mut dec_in = vec![BOS];
    let mut out = Vec::new();
    while out.len() < limit {
        let mut g = Graph::new(&model.params);
        let mem = g.constant(memory.clone());
        let logits = model.decode(&mut g, mem, &dec_in);
        let last: Vec<f64> = g
            .value(logits)
            .row(dec_in.len() - 1)
            .iter()
            .map(|x| x.as_f64())
            .collect();
        let next = pick(&last, cfg, rng);
        if next == EOS {
            break;
        }
        out.push(next);
        dec_in.push(next);
    }
    out
}

/// Deterministic per-call seed derived from the decode seed, task and attempt.
pub fn attempt_seed(seed: u64, task_id: &str, attempt: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(task_id.as_bytes());
    h.update((attempt as u64).to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

/// Produces one candidate question per call.
pub trait QuestionGenerator: Send + Sync {
    /// `attempt` counts from 0 and selects the sampling stream.
    fn generate(&self, ct: &CaptionedTask, attempt: usize) -> Result<Question>;

    fn id(&self) -> String;
}

pub struct Seq2SeqGenerator<'a, T: Scalar> {
    pub model: &'a Seq2Seq<T>,
    pub tokenizer: &'a WordTokenizer,
    pub decode: DecodeConfig,
    pub include_address: bool,
}

impl<T: Scalar> Seq2SeqGenerator<'_, T> {
    fn decode_text(&self, src: &[usize], seed: u64) -> String {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ids = generate_ids(self.model, src, &self.decode, &mut rng);
        self.tokenizer.decode(&ids)
    }
}

impl<T: Scalar> QuestionGenerator for Seq2SeqGenerator<'_, T> {
    /// An empty decode is retried once with a fresh stream before failing.
    fn generate(&self, ct: &CaptionedTask, attempt: usize) -> Result<Question> {
        let src = self.tokenizer.encode(&generation_input(ct, self.include_address));
        let task_id = ct.task_id();
        let first = self.decode_text(&src, attempt_seed(self.decode.seed, task_id, attempt));
        let text = if first.trim().is_empty() {
            log::warn!("task {task_id}: empty decode, retrying once");
            self.decode_text(&src, attempt_seed(self.decode.seed ^ 0xa5a5, task_id, attempt))
        } else {
            first
        };
        if text.trim().is_empty() {
            return Err(QgenError::EmptyDecode {
                task_id: task_id.to_string(),
            });
        }
        Ok(Question::new(text, QuestionSource::Student, task_id))
    }

    fn id(&self) -> String {
        format!("{}+{}", self.model.architecture_id(), self.tokenizer.id())
    }
}
