//! Overlap, embedding and corpus-analysis metrics for generated questions.

pub mod corpus;
pub mod embedding;
pub mod error;
pub mod lexicon;
pub mod overlap;
pub mod report;
pub mod yngve;

pub use corpus::{
    abstract_term_ratio, corpus_stats, frequent_words, pairwise_cosine, question_types, term_depth, type_map, words,
    Corpus, CorpusStats, QuestionTypes, NOUN_POLICY, SHORT_BUCKET,
};
pub use embedding::{
    cosine, embedding_score, EmbeddingBackend, HashedEncoder, MetricValue, SentenceEncoder, TokenEncoder,
};
pub use error::{MetricsError, Result};
pub use lexicon::{builtin_abstract_terms, builtin_stopwords, Hierarchy, Lexicon};
pub use overlap::{bleu4, bleu_stats, corpus_bleu4, ngram_counts, rouge2, BleuStats};
pub use report::{MetricEntry, MetricReport};
pub use yngve::{normalized_yngve, yngve, ConstituencyParser, ParseFile, Tree, YngveReport};

/// Smoothing recorded alongside BLEU values.
pub const BLEU_SMOOTHING: &str = "add-one-n>=2";
