use locavqg_core::DatasetRecord;
use locavqg_promptgen::{generation_input, GENERATION_PREFIX};
use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QgenError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QGExample {
    pub task_id: String,
    pub input: String,
    pub target: String,
}

impl QGExample {
    pub fn new(task_id: impl Into<String>, input: impl Into<String>, target: impl Into<String>) -> Result<Self> {
        let ex = Self {
            task_id: task_id.into(),
            input: input.into(),
            target: target.into(),
        };
        if !ex.input.starts_with(GENERATION_PREFIX) {
            return Err(QgenError::InvalidConfig(format!(
                "input must start with {GENERATION_PREFIX:?}"
            )));
        }
        if ex.target.trim().is_empty() {
            return Err(QgenError::InvalidConfig("empty target question".into()));
        }
        Ok(ex)
    }
}

/// Samples up to `questions_per_task` kept questions per record, pairing
/// each with the record's generation input. Records without questions are
/// skipped.
pub fn build_training_set(
    records: &[DatasetRecord],
    questions_per_task: usize,
    include_address: bool,
    seed: u64,
) -> Vec<QGExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for r in records {
        if r.questions.is_empty() {
            log::warn!("record {} has no questions; skipped", r.captioned.task_id());
            continue;
        }
        let input = generation_input(&r.captioned, include_address);
        let k = questions_per_task.min(r.questions.len());
        let mut picks = index::sample(&mut rng, r.questions.len(), k).into_vec();
        picks.sort_unstable();
        for i in picks {
            out.push(QGExample {
                task_id: r.captioned.task_id().to_string(),
                input: input.clone(),
                target: r.questions[i].text.clone(),
            });
        }
    }
    out
}

/// Seeded subset holding `ceil(fraction · len)` records, in original order.
pub fn subsample_records(records: &[DatasetRecord], fraction: f64, seed: u64) -> Result<Vec<DatasetRecord>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(QgenError::InvalidConfig(format!(
            "dataset_fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let n = ((records.len() as f64) * fraction).ceil() as usize;
    let mut idx: Vec<usize> = (0..records.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx.truncate(n);
    idx.sort_unstable();
    Ok(idx.into_iter().map(|i| records[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use locavqg_core::{
        CaptionedTask, DirectionalImages, Direction, GeoCoordinate, LocaVQGTask, Question, QuestionSource,
    };
    use std::collections::BTreeMap;

    fn record(id: &str, n: usize) -> DatasetRecord {
        let captions: BTreeMap<Direction, String> =
            Direction::ALL.iter().map(|d| (*d, format!("a view to the {}", d.as_str()))).collect();
        DatasetRecord {
            captioned: CaptionedTask {
                task: LocaVQGTask {
                    task_id: id.into(),
                    coordinate: GeoCoordinate::new(40.0, -80.0),
                    images: DirectionalImages::new("n", "e", "s", "w"),
                    city: None,
                },
                captions,
                address: "1 Main St".into(),
            },
            questions: (0..n)
                .map(|i| Question::new(format!("Question {i} about {id}?"), QuestionSource::Llm, id).with_score(0.9))
                .collect(),
            rejected: vec![],
        }
    }

    #[test]
    fn five_per_task_clamped_and_deterministic() {
        let recs = vec![record("a", 8), record("b", 2), record("c", 0)];
        let ex = build_training_set(&recs, 5, true, 4);
        assert_eq!(ex.iter().filter(|e| e.task_id == "a").count(), 5);
        assert_eq!(ex.iter().filter(|e| e.task_id == "b").count(), 2);
        assert_eq!(ex.len(), 7);
        assert_eq!(ex, build_training_set(&recs, 5, true, 4));
        assert!(ex.iter().all(|e| e.input.starts_with("generate questions: You are currently driving on 1 Main St.")));
        let no_addr = build_training_set(&recs, 5, false, 4);
        assert!(no_addr.iter().all(|e| !e.input.contains("1 Main St")));
    }

    #[test]
    fn example_invariants() {
        assert!(QGExample::new("t", "generate questions: x", "Why?").is_ok());
        assert!(QGExample::new("t", "x", "Why?").is_err());
        assert!(QGExample::new("t", "generate questions: x", "  ").is_err());
    }

    #[test]
    fn fractions() {
        let recs: Vec<_> = (0..10).map(|i| record(&format!("r{i}"), 1)).collect();
        assert_eq!(subsample_records(&recs, 0.2, 1).unwrap().len(), 2);
        assert_eq!(subsample_records(&recs, 1.0, 1).unwrap().len(), 10);
        assert!(subsample_records(&recs, 0.0, 1).is_err());
        assert!(subsample_records(&recs, 1.5, 1).is_err());
        let a = subsample_records(&recs, 0.4, 9).unwrap();
        let b = subsample_records(&recs, 0.4, 9).unwrap();
        assert_eq!(a, b);
    }
}
