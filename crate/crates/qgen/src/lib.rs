//! Lightweight seq2seq question generators: tokenizer, transformer
//! encoder-decoder, hard-label fine-tuning, logit-level distillation and
//! classifier-filtered inference.

pub mod checkpoint;
pub mod data;
pub mod decode;
pub mod error;
pub mod filtered;
pub mod loss;
pub mod synthetic;
pub mod model;
pub mod tokenizer;
pub mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, MODEL_FILE, RUN_MANIFEST_FILE, TOKENIZER_FILE};
pub use data::{build_training_set, subsample_records, QGExample};
pub use decode::{attempt_seed, generate_ids, DecodeConfig, QuestionGenerator, Seq2SeqGenerator, Strategy};
pub use error::{QgenError, Result};
pub use filtered::{filtered_generate, BernoulliScorer, EchoGenerator, FilteredQuestion};
pub use loss::{cross_entropy, distillation_loss, DistillLoss};
pub use model::{teacher_forcing, ModelConfig, Seq2Seq, Tier};
pub use tokenizer::WordTokenizer;
pub use train::{
    distill, encode_examples, evaluate, evaluate_encoded, finetune, train_encoded, DistillConfig,
    EncodedExample, Teacher, TrainConfig, TrainCurve,
};

pub type Seq2Seq32 = Seq2Seq<f32>;
pub type Seq2Seq64 = Seq2Seq<f64>;
pub type DistillLoss32 = DistillLoss<f32>;
pub type DistillLoss64 = DistillLoss<f64>;
