use locavqg_core::Scalar;
use locavqg_nn::{Adam, AdamConfig, GradBuffer, Graph, Tensor};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::QGExample;
use crate::decode::{generate_ids, DecodeConfig};
use crate::error::{QgenError, Result};
use crate::loss::{cross_entropy, distillation_loss};
use crate::model::{teacher_forcing, Seq2Seq};
use crate::tokenizer::WordTokenizer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub clip_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            lr: 1e-4,
            batch_size: 16,
            seed: 0,
            clip_norm: Some(1.0),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(QgenError::InvalidConfig("epochs and batch_size must be >= 1".into()));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(QgenError::InvalidConfig(format!("lr must be > 0, got {}", self.lr)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistillConfig {
    pub alpha: f64,
    pub temperature: f64,
    pub train: TrainConfig,
    pub questions_per_task: usize,
    /// Also train on the teacher's greedy outputs as extra hard targets.
    pub sequence_level: bool,
}

impl Default for DistillConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            temperature: 2.0,
            train: TrainConfig::default(),
            questions_per_task: 5,
            sequence_level: false,
        }
    }
}

impl DistillConfig {
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(QgenError::InvalidConfig(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(QgenError::InvalidConfig(format!(
                "temperature must be > 0, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

/// Token-level training pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedExample {
    pub src: Vec<usize>,
    pub dec_in: Vec<usize>,
    pub labels: Vec<usize>,
}

impl EncodedExample {
    pub fn new(src: Vec<usize>, target: &[usize], max_src: usize, max_tgt: usize) -> Self {
        let mut src = src;
        src.truncate(max_src);
        let (dec_in, labels) = teacher_forcing(target, max_tgt);
        Self { src, dec_in, labels }
    }
}

pub fn encode_examples<T: Scalar>(
    model: &Seq2Seq<T>,
    tokenizer: &WordTokenizer,
    examples: &[QGExample],
) -> Vec<EncodedExample> {
    examples
        .iter()
        .map(|e| {
            EncodedExample::new(
                tokenizer.encode(&e.input),
                &tokenizer.encode(&e.target),
                model.config.max_src,
                model.config.max_tgt,
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainCurve {
    /// Mean training loss per token over each epoch.
    pub epoch_losses: Vec<f64>,
    /// Cross-entropy on the training set before the first update.
    pub initial_loss: f64,
    /// Cross-entropy on the training set after the last update.
    pub final_loss: f64,
    pub steps: usize,
}

/// Soft-label source for [`train_encoded`].
#[derive(Clone, Copy)]
pub struct Teacher<'a, T: Scalar> {
    pub model: &'a Seq2Seq<T>,
    pub alpha: f64,
    pub temperature: f64,
}

/// Mean per-token cross-entropy of `model` on `data`.
pub fn evaluate_encoded<T: Scalar>(model: &Seq2Seq<T>, data: &[EncodedExample]) -> Result<f64> {
    if data.is_empty() {
        return Err(QgenError::NoExamples);
    }
    let parts: Vec<(f64, usize)> = data
        .par_iter()
        .map(|e| {
            let logits = model.logits(&e.src, &e.dec_in);
            let r = cross_entropy(&logits, &e.labels)?;
            Ok((r.loss.as_f64() * r.positions as f64, r.positions))
        })
        .collect::<Result<_>>()?;
    let (sum, n) = parts.iter().fold((0.0, 0), |(s, n), (l, k)| (s + l, n + k));
    Ok(sum / n.max(1) as f64)
}

pub fn evaluate<T: Scalar>(model: &Seq2Seq<T>, tokenizer: &WordTokenizer, examples: &[QGExample]) -> Result<f64> {
    evaluate_encoded(model, &encode_examples(model, tokenizer, examples))
}

struct ExampleGrad<T: Scalar> {
    loss_sum: f64,
    positions: usize,
    grads: GradBuffer<T>,
}

fn example_grad<T: Scalar>(
    model: &Seq2Seq<T>,
    e: &EncodedExample,
    teacher: Option<&Teacher<'_, T>>,
    batch_positions: usize,
) -> Result<ExampleGrad<T>> {
    let mut g = Graph::new(&model.params);
    let out = model.forward(&mut g, &e.src, &e.dec_in);
    let logits = g.value(out);
    let r = match teacher {
        Some(t) => {
            let tl = t.model.logits(&e.src, &e.dec_in);
            distillation_loss(logits, &tl, &e.labels, t.alpha, t.temperature)?
        }
        None => cross_entropy(logits, &e.labels)?,
    };
    // re-weight the per-example mean into a mean over the whole batch
    let w = T::of_usize(r.positions) / T::of_usize(batch_positions.max(1));
    let seed: Tensor<T> = r.grad.map(|x| x * w);
    Ok(ExampleGrad {
        loss_sum: r.loss.as_f64() * r.positions as f64,
        positions: r.positions,
        grads: g.backward(out, seed),
    })
}

/// Shared training loop. `teacher = None` trains on hard labels only.
///
/// On a non-finite loss or gradient the parameters are restored to the
/// end of the last finished epoch and an error is returned.
pub fn train_encoded<T: Scalar>(
    model: &mut Seq2Seq<T>,
    data: &[EncodedExample],
    teacher: Option<Teacher<'_, T>>,
    config: &TrainConfig,
) -> Result<TrainCurve> {
    config.validate()?;
    if data.is_empty() {
        return Err(QgenError::NoExamples);
    }
    if let Some(t) = &teacher {
        if t.model.tokenizer_id != model.tokenizer_id {
            return Err(QgenError::TokenizerMismatch {
                student: model.tokenizer_id.clone(),
                teacher: t.model.tokenizer_id.clone(),
            });
        }
        if t.model.config.vocab != model.config.vocab {
            return Err(QgenError::Shape(format!(
                "teacher vocab {} vs student vocab {}",
                t.model.config.vocab, model.config.vocab
            )));
        }
    }

    let initial_loss = evaluate_encoded(model, data)?;
    let mut opt = Adam::new(
        AdamConfig {
            clip_norm: config.clip_norm,
            ..AdamConfig::with_lr(config.lr)
        },
        &model.params,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut steps = 0;

    for epoch in 0..config.epochs {
        let snapshot = model.params.clone();
        order.shuffle(&mut rng);
        let (mut epoch_sum, mut epoch_n) = (0.0, 0usize);
        for (step, batch) in order.chunks(config.batch_size).enumerate() {
            let batch_positions: usize = batch.iter().map(|&i| data[i].labels.len()).sum();
            let parts: Vec<ExampleGrad<T>> = batch
                .par_iter()
                .map(|&i| example_grad(model, &data[i], teacher.as_ref(), batch_positions))
                .collect::<Result<_>>()?;
            let mut iter = parts.into_iter();
            let mut acc = iter.next().expect("non-empty batch");
            for p in iter {
                acc.loss_sum += p.loss_sum;
                acc.positions += p.positions;
                acc.grads.merge(&p.grads);
            }
            let batch_loss = acc.loss_sum / acc.positions.max(1) as f64;
            if !batch_loss.is_finite() || !acc.grads.is_finite() {
                model.params = snapshot;
                log::error!("training diverged at epoch {}, step {step}; restored epoch {epoch}", epoch + 1);
                return Err(QgenError::Diverged {
                    epoch: epoch + 1,
                    step,
                    loss: batch_loss,
                    restored_epoch: epoch,
                });
            }
            epoch_sum += acc.loss_sum;
            epoch_n += acc.positions;
            opt.step(&mut model.params, &acc.grads);
            steps += 1;
        }
        let mean = epoch_sum / epoch_n.max(1) as f64;
        log::info!("epoch {}: loss {mean:.5}", epoch + 1);
        epoch_losses.push(mean);
    }
    let final_loss = evaluate_encoded(model, data)?;
    Ok(TrainCurve {
        epoch_losses,
        initial_loss,
        final_loss,
        steps,
    })
}

fn check_tokenizer<T: Scalar>(model: &Seq2Seq<T>, tokenizer: &WordTokenizer) -> Result<()> {
    if model.tokenizer_id != tokenizer.id() {
        return Err(QgenError::TokenizerMismatch {
            student: model.tokenizer_id.clone(),
            teacher: tokenizer.id(),
        });
    }
    Ok(())
}

/// Hard-label fine-tuning.
pub fn finetune<T: Scalar>(
    model: &mut Seq2Seq<T>,
    tokenizer: &WordTokenizer,
    examples: &[QGExample],
    config: &TrainConfig,
) -> Result<TrainCurve> {
    check_tokenizer(model, tokenizer)?;
    let data = encode_examples(model, tokenizer, examples);
    train_encoded(model, &data, None, config)
}

/// Trains `student` under the combined hard/soft objective against `teacher`.
pub fn distill<T: Scalar>(
    teacher: &Seq2Seq<T>,
    student: &mut Seq2Seq<T>,
    tokenizer: &WordTokenizer,
    examples: &[QGExample],
    config: &DistillConfig,
) -> Result<TrainCurve> {
    config.validate()?;
    if teacher.tokenizer_id != student.tokenizer_id {
        return Err(QgenError::TokenizerMismatch {
            student: student.tokenizer_id.clone(),
            teacher: teacher.tokenizer_id.clone(),
        });
    }
    check_tokenizer(student, tokenizer)?;
    let mut data = encode_examples(student, tokenizer, examples);
    if config.sequence_level {
        let mut seen = std::collections::BTreeSet::new();
        let greedy = DecodeConfig::greedy();
        let sources: Vec<Vec<usize>> = data
            .iter()
            .filter(|e| seen.insert(e.src.clone()))
            .map(|e| e.src.clone())
            .collect();
        let extra: Vec<EncodedExample> = sources
            .par_iter()
            .filter_map(|src| {
                let ids = generate_ids(teacher, src, &greedy, &mut ChaCha8Rng::seed_from_u64(0));
                (!ids.is_empty()).then(|| {
                    EncodedExample::new(src.clone(), &ids, student.config.max_src, student.config.max_tgt)
                })
            })
            .collect();
        log::info!("sequence-level arm adds {} teacher outputs", extra.len());
        data.extend(extra);
    }
    let t = Teacher {
        model: teacher,
        alpha: config.alpha,
        temperature: config.temperature,
    };
    train_encoded(student, &data, Some(t), &config.train)
}
