//! Engaging-question classification: corpus construction, training of a
//! binary classifier, scoring and threshold filtering.

pub mod corpus;
pub mod error;
pub mod features;
pub mod filter;
pub mod model;
pub mod synthetic;
pub mod train;

pub use corpus::{
    build_corpus, read_question_list, Corpus, Label, LabeledQuestion, Origin, Split, SplitFractions,
};
pub use error::{EngageError, Result};
pub use filter::{filter, score_batch, ConstantScorer, CueScorer, DEFAULT_CUES};
pub use model::{ClassifierBackend, ClassifierModel, ModelSpec, CHECKPOINT_FILE};
pub use train::{
    accuracy, train_classifier, train_from, ClassifierTrainConfig, ClassifierTrainReport,
    SplitAccuracy,
};

pub type ClassifierModel32 = ClassifierModel<f32>;
pub type ClassifierModel64 = ClassifierModel<f64>;
