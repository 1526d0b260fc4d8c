use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use locavqg_core::text::{is_word_token, split_sentences, tokenize, SENTENCE_POLICY, TOKENIZER_POLICY};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{cosine, MetricValue, SentenceEncoder};
use crate::error::{MetricsError, Result};
use crate::lexicon::{Hierarchy, Lexicon};

/// Bucket for questions with fewer than three word tokens.
pub const SHORT_BUCKET: &str = "short";

/// Nouns are tokens with an entry in the hierarchy.
pub const NOUN_POLICY: &str = "hierarchy-lookup-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub questions: Vec<String>,
    pub tokenizer: String,
    pub sentence_splitter: String,
}

impl Corpus {
    pub fn new<S: Into<String>>(questions: impl IntoIterator<Item = S>) -> Self {
        Self {
            questions: questions.into_iter().map(Into::into).collect(),
            tokenizer: TOKENIZER_POLICY.into(),
            sentence_splitter: SENTENCE_POLICY.into(),
        }
    }

    /// One question per non-empty line.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| MetricsError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::new(text.lines().map(str::trim).filter(|l| !l.is_empty())))
    }

    pub fn len(&self) -> usize {
        self.questions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }

    /// Case-folded word tokens of each question (punctuation dropped).
    pub fn words(&self) -> impl Iterator<Item = Vec<String>> + '_ {
        self.questions.iter().map(|q| words(q))
    }
}

pub fn words(text: &str) -> Vec<String> {
    tokenize(text).into_iter().filter(|t| is_word_token(t)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub questions: usize,
    pub vocab: usize,
    pub avg_sentence_len: f64,
    pub avg_question_len: f64,
}

pub fn corpus_stats(corpus: &Corpus) -> Result<CorpusStats> {
    if corpus.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let mut vocab = HashSet::new();
    let mut q_tokens = 0usize;
    let (mut s_tokens, mut sentences) = (0usize, 0usize);
    for q in &corpus.questions {
        let w = words(q);
        q_tokens += w.len();
        vocab.extend(w);
        for s in split_sentences(q) {
            s_tokens += words(&s).len();
            sentences += 1;
        }
    }
    Ok(CorpusStats {
        questions: corpus.len(),
        vocab: vocab.len(),
        avg_sentence_len: if sentences == 0 { 0.0 } else { s_tokens as f64 / sentences as f64 },
        avg_question_len: q_tokens as f64 / corpus.len() as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionTypes {
    /// Sorted by count descending, then lexicographically.
    pub counts: Vec<(String, usize)>,
    pub distinct: usize,
}

/// Groups questions by their first three word tokens.
pub fn question_types(corpus: &Corpus) -> QuestionTypes {
    let mut m: HashMap<String, usize> = HashMap::new();
    for w in corpus.words() {
        let key = if w.len() < 3 { SHORT_BUCKET.to_string() } else { w[..3].join(" ") };
        *m.entry(key).or_insert(0) += 1;
    }
    let counts = sort_counts(m);
    let distinct = counts.iter().filter(|(k, _)| k != SHORT_BUCKET).count();
    QuestionTypes { counts, distinct }
}

fn sort_counts(m: HashMap<String, usize>) -> Vec<(String, usize)> {
    let mut v: Vec<_> = m.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

/// Top-`k` case-folded words not in `stoplist`.
pub fn frequent_words(corpus: &Corpus, stoplist: &Lexicon, k: usize) -> Vec<(String, usize)> {
    let mut m: HashMap<String, usize> = HashMap::new();
    for w in corpus.words().flatten() {
        if !stoplist.contains(&w) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    let mut v = sort_counts(m);
    v.truncate(k);
    v
}

/// Fraction of word tokens found in `lexicon`; 0 for a corpus without words.
pub fn abstract_term_ratio(corpus: &Corpus, lexicon: &Lexicon) -> f64 {
    let (mut hit, mut total) = (0usize, 0usize);
    for w in corpus.words().flatten() {
        total += 1;
        if lexicon.contains(&w) {
            hit += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        hit as f64 / total as f64
    }
}

/// Mean minimum depth over noun tokens.
pub fn term_depth(corpus: &Corpus, hierarchy: &Hierarchy) -> Result<f64> {
    let (mut sum, mut n) = (0u64, 0u64);
    for w in corpus.words().flatten() {
        if let Some(d) = hierarchy.min_depth(&w) {
            sum += d as u64;
            n += 1;
        }
    }
    if n == 0 {
        return Err(MetricsError::NoNouns);
    }
    Ok(sum as f64 / n as f64)
}

/// Mean cosine over all unordered pairs of a seeded sample of questions.
/// `encoder = None` yields an unavailable marker.
pub fn pairwise_cosine(
    corpus: &Corpus,
    encoder: Option<&dyn SentenceEncoder>,
    sample_size: usize,
    seed: u64,
) -> Result<MetricValue> {
    if sample_size < 2 {
        return Err(MetricsError::SampleTooSmall(sample_size));
    }
    let Some(enc) = encoder else {
        return Ok(MetricValue::Unavailable("no sentence encoder".into()));
    };
    let n = sample_size.min(corpus.len());
    if n < 2 {
        return Err(MetricsError::SampleTooSmall(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, corpus.len(), n).into_vec();
    idx.sort_unstable();
    let vecs: Vec<Vec<f64>> = idx.iter().map(|&i| enc.encode(&corpus.questions[i])).collect();
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            sum += cosine(&vecs[i], &vecs[j]);
            pairs += 1;
        }
    }
    Ok(MetricValue::Value(sum / pairs as f64))
}

/// Type counts as an ordered map, for reports.
pub fn type_map(t: &QuestionTypes) -> BTreeMap<String, usize> {
    t.counts.iter().cloned().collect()
}
