use locavqg_core::text::nfc;
use locavqg_core::{EngagementScorer, Question};
use rayon::prelude::*;

/// Scores every question and partitions by `score >= threshold`.
///
/// Order is preserved within each part and every returned question carries
/// its score.
pub fn filter<S: EngagementScorer + ?Sized>(
    scorer: &S,
    questions: Vec<Question>,
    threshold: f64,
) -> (Vec<Question>, Vec<Question>) {
    let scores = score_batch(scorer, questions.iter().map(|q| q.text.as_str()));
    let mut kept = Vec::new();
    let mut rejected = Vec::new();
    for (q, s) in questions.into_iter().zip(scores) {
        let q = q.with_score(s);
        if s >= threshold {
            kept.push(q);
        } else {
            rejected.push(q);
        }
    }
    (kept, rejected)
}

/// Scores texts in parallel; output order follows input order.
pub fn score_batch<'a, S: EngagementScorer + ?Sized>(
    scorer: &S,
    texts: impl Iterator<Item = &'a str>,
) -> Vec<f64> {
    let texts: Vec<&str> = texts.collect();
    texts.par_iter().map(|t| scorer.score(t)).collect()
}

/// Scores 1 when the case-folded text contains any cue phrase, else 0.
#[derive(Debug, Clone)]
pub struct CueScorer {
    cues: Vec<String>,
}

/// Cue phrases that mark open, conversational questions.
pub const DEFAULT_CUES: &[&str] = &[
    "guess",
    "imagine",
    "you think",
    "would you",
    "you noticed",
    "can you spot",
    "you could",
    "wondered",
];

impl CueScorer {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(cues: I) -> Self {
        Self {
            cues: cues.into_iter().map(|c| c.into().to_lowercase()).collect(),
        }
    }
}

impl Default for CueScorer {
    fn default() -> Self {
        Self::new(DEFAULT_CUES.iter().copied())
    }
}

impl EngagementScorer for CueScorer {
    fn score(&self, text: &str) -> f64 {
        let t = nfc(text).to_lowercase();
        if self.cues.iter().any(|c| t.contains(c.as_str())) {
            1.0
        } else {
            0.0
        }
    }

    fn id(&self) -> String {
        format!("stub-cue:{}", self.cues.join("|"))
    }
}

/// Returns the same score for every input.
#[derive(Debug, Clone, Copy)]
pub struct ConstantScorer(pub f64);

impl EngagementScorer for ConstantScorer {
    fn score(&self, _text: &str) -> f64 {
        self.0
    }

    fn id(&self) -> String {
        format!("stub-constant:{}", self.0)
    }
}
