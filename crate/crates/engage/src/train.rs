use locavqg_core::Scalar;
use locavqg_nn::{Adam, AdamConfig};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label, LabeledQuestion, Split, SplitFractions};
use crate::error::{EngageError, Result};
use crate::model::{ClassifierBackend, ClassifierModel, ModelSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierTrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub optimizer: String,
    pub batch_size: usize,
    pub splits: SplitFractions,
    pub seed: u64,
    pub model: ModelSpec,
}

impl Default for ClassifierTrainConfig {
    /// 10 epochs at lr 1e-5, the pretrained-encoder fine-tuning setting.
    fn default() -> Self {
        Self {
            epochs: 10,
            lr: 1e-5,
            optimizer: "adam".into(),
            batch_size: 32,
            splits: SplitFractions::default(),
            seed: 0,
            model: ModelSpec::for_backend(ClassifierBackend::BagOfEmbeddings),
        }
    }
}

impl ClassifierTrainConfig {
    /// Defaults for a backend trained from random init, which needs a far
    /// larger step size than fine-tuning a pretrained encoder.
    pub fn for_backend(backend: ClassifierBackend) -> Self {
        let lr = match backend {
            ClassifierBackend::Lexical => 0.05,
            ClassifierBackend::BagOfEmbeddings => 0.01,
        };
        Self {
            lr,
            model: ModelSpec::for_backend(backend),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.splits.validate()?;
        self.model.validate()?;
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(EngageError::InvalidConfig(
                "epochs and batch_size must be >= 1".into(),
            ));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(EngageError::InvalidConfig(format!("lr must be > 0, got {}", self.lr)));
        }
        if self.optimizer != "adam" {
            return Err(EngageError::InvalidConfig(format!(
                "unsupported optimizer {:?}",
                self.optimizer
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitAccuracy {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierTrainReport {
    pub encoder_id: String,
    pub epoch_losses: Vec<f64>,
    /// `NaN` for an empty split.
    pub accuracy: SplitAccuracy,
    pub config: ClassifierTrainConfig,
}

/// Fraction of `items` the model labels correctly; `NaN` when empty.
pub fn accuracy<T: Scalar>(model: &ClassifierModel<T>, items: &[LabeledQuestion]) -> f64 {
    if items.is_empty() {
        return f64::NAN;
    }
    let correct = items
        .iter()
        .filter(|q| model.predict(&q.text) == (q.label == Label::Engaging))
        .count();
    correct as f64 / items.len() as f64
}

pub fn train_classifier<T: Scalar>(
    corpus: &Corpus,
    config: &ClassifierTrainConfig,
) -> Result<(ClassifierModel<T>, ClassifierTrainReport)> {
    config.validate()?;
    let model = ClassifierModel::<T>::new(config.model, config.seed)?;
    train_from(model, corpus, config)
}

/// Trains `model` in place of a fresh initialization.
pub fn train_from<T: Scalar>(
    mut model: ClassifierModel<T>,
    corpus: &Corpus,
    config: &ClassifierTrainConfig,
) -> Result<(ClassifierModel<T>, ClassifierTrainReport)> {
    config.validate()?;
    let train = &corpus.train;
    if !train.iter().any(|q| q.label == Label::Engaging) {
        return Err(EngageError::SingleClass("engaging"));
    }
    if !train.iter().any(|q| q.label == Label::NonEngaging) {
        return Err(EngageError::SingleClass("non-engaging"));
    }

    let mut opt = Adam::new(
        AdamConfig {
            weight_decay: 0.0,
            ..AdamConfig::with_lr(config.lr)
        },
        &model.params,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut last_finite = None;

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for (step, batch) in order.chunks(config.batch_size).enumerate() {
            let scale = 1.0 / batch.len() as f64;
            let mut grads = None;
            let mut batch_loss = 0.0;
            for &i in batch {
                let q = &train[i];
                let (loss, g) = model.example_grad(&q.text, q.label.target(), scale);
                batch_loss += loss;
                match &mut grads {
                    None => grads = Some(g),
                    Some(acc) => acc.merge(&g),
                }
            }
            let grads = grads.expect("non-empty batch");
            if !batch_loss.is_finite() || !grads.is_finite() {
                log::error!("classifier training diverged at epoch {epoch}, step {step}");
                return Err(EngageError::Diverged {
                    epoch,
                    step,
                    loss: batch_loss * scale,
                    last_finite,
                });
            }
            last_finite = Some(batch_loss * scale);
            total += batch_loss;
            opt.step(&mut model.params, &grads);
        }
        let mean = total / train.len() as f64;
        log::info!("classifier epoch {}: mean loss {mean:.5}", epoch + 1);
        epoch_losses.push(mean);
    }

    let acc = |s: Split| accuracy(&model, corpus.split(s));
    let report = ClassifierTrainReport {
        encoder_id: model.encoder_id(),
        epoch_losses,
        accuracy: SplitAccuracy {
            train: acc(Split::Train),
            val: acc(Split::Val),
            test: acc(Split::Test),
        },
        config: config.clone(),
    };
    Ok((model, report))
}
