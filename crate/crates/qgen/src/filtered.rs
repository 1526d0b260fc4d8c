use locavqg_core::{CaptionedTask, EngagementScorer, Question};
use parking_lot::Mutex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decode::QuestionGenerator;
use crate::error::{QgenError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredQuestion {
    /// Carries its engagingness score.
    pub question: Question,
    pub attempts: usize,
    /// No attempt reached the threshold; `question` is the best-scoring one.
    pub fallback: bool,
}

/// Regenerates until `scorer` accepts a candidate, up to `max_attempts`.
///
/// Attempts whose decode fails count towards the cap. When every attempt
/// fails to decode, the last error is returned.
pub fn filtered_generate<G, S>(
    generator: &G,
    scorer: &S,
    ct: &CaptionedTask,
    max_attempts: usize,
    threshold: f64,
) -> Result<FilteredQuestion>
where
    G: QuestionGenerator + ?Sized,
    S: EngagementScorer + ?Sized,
{
    if max_attempts == 0 {
        return Err(QgenError::InvalidConfig("max_attempts must be >= 1".into()));
    }
    let mut best: Option<Question> = None;
    let mut last_err = None;
    for attempt in 0..max_attempts {
        let q = match generator.generate(ct, attempt) {
            Ok(q) => q,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let s = scorer.score(&q.text);
        let q = q.with_score(s);
        if s >= threshold {
            return Ok(FilteredQuestion {
                question: q,
                attempts: attempt + 1,
                fallback: false,
            });
        }
        if best.as_ref().map_or(true, |b| s > b.engaging_score.unwrap_or(f64::NEG_INFINITY)) {
            best = Some(q);
        }
    }
    match best {
        Some(question) => {
            log::debug!("task {}: no accepted question after {max_attempts} attempts", ct.task_id());
            Ok(FilteredQuestion {
                question,
                attempts: max_attempts,
                fallback: true,
            })
        }
        None => Err(last_err.expect("every attempt failed")),
    }
}

/// Accepts independently with probability `p` on every call.
#[derive(Debug)]
pub struct BernoulliScorer {
    p: f64,
    rng: Mutex<ChaCha8Rng>,
}

impl BernoulliScorer {
    pub fn new(p: f64, seed: u64) -> Self {
        Self {
            p,
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(seed)),
        }
    }
}

impl EngagementScorer for BernoulliScorer {
    fn score(&self, _text: &str) -> f64 {
        if self.rng.lock().gen_bool(self.p) {
            1.0
        } else {
            0.0
        }
    }

    fn id(&self) -> String {
        format!("stub-bernoulli:{}", self.p)
    }
}

/// Returns `question {task} #{attempt}` for every call.
#[derive(Debug, Clone, Default)]
pub struct EchoGenerator;

impl QuestionGenerator for EchoGenerator {
    fn generate(&self, ct: &CaptionedTask, attempt: usize) -> Result<Question> {
        Ok(Question::new(
            format!("question {} #{attempt}?", ct.task_id()),
            locavqg_core::QuestionSource::Student,
            ct.task_id(),
        ))
    }

    fn id(&self) -> String {
        "stub-echo".into()
    }
}
