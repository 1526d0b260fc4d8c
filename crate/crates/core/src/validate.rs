use std::collections::HashSet;
use std::fmt;

use crate::types::{CaptionedTask, DatasetRecord, Direction, LocaVQGTask, Question};

/// A single broken invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyTaskId,
    NonFiniteCoordinate,
    LatitudeOutOfRange(f64),
    LongitudeOutOfRange(f64),
    DuplicateDirection(Direction),
    MissingDirection(Direction),
    EmptyImageRef(Direction),
    MissingCaption(Direction),
    EmptyCaption(Direction),
    EmptyAddress,
    EmptyQuestion { index: usize },
    ScoreOutOfRange { index: usize, score: f64 },
    KeptBelowThreshold { index: usize, score: Option<f64>, threshold: f64 },
    RejectedAboveThreshold { index: usize, score: Option<f64>, threshold: f64 },
    ForeignQuestion { index: usize, task_id: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyTaskId => write!(f, "task id is empty"),
            Violation::NonFiniteCoordinate => write!(f, "coordinate is not finite"),
            Violation::LatitudeOutOfRange(v) => write!(f, "latitude out of range: {v}"),
            Violation::LongitudeOutOfRange(v) => write!(f, "longitude out of range: {v}"),
            Violation::DuplicateDirection(d) => write!(f, "duplicate direction {d}"),
            Violation::MissingDirection(d) => write!(f, "missing direction {d}"),
            Violation::EmptyImageRef(d) => write!(f, "empty image reference for {d}"),
            Violation::MissingCaption(d) => write!(f, "missing caption for {d}"),
            Violation::EmptyCaption(d) => write!(f, "empty caption for {d}"),
            Violation::EmptyAddress => write!(f, "address is empty"),
            Violation::EmptyQuestion { index } => write!(f, "question {index} is empty"),
            Violation::ScoreOutOfRange { index, score } => {
                write!(f, "question {index} has score {score} outside [0, 1]")
            }
            Violation::KeptBelowThreshold {
                index,
                score,
                threshold,
            } => write!(
                f,
                "kept question {index} has score {score:?} below threshold {threshold}"
            ),
            Violation::RejectedAboveThreshold {
                index,
                score,
                threshold,
            } => write!(
                f,
                "rejected question {index} has score {score:?} at or above threshold {threshold}"
            ),
            Violation::ForeignQuestion { index, task_id } => {
                write!(f, "question {index} belongs to task {task_id:?}")
            }
        }
    }
}

/// Outcome of a validation pass. `ok` iff no violations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }

    fn extend(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

pub fn validate_task(task: &LocaVQGTask) -> ValidationReport {
    let mut report = ValidationReport::default();
    if task.task_id.trim().is_empty() {
        report.push(Violation::EmptyTaskId);
    }
    let c = task.coordinate;
    if !c.latitude.is_finite() || !c.longitude.is_finite() {
        report.push(Violation::NonFiniteCoordinate);
    } else {
        if !c.latitude_in_range() {
            report.push(Violation::LatitudeOutOfRange(c.latitude));
        }
        if !c.longitude_in_range() {
            report.push(Violation::LongitudeOutOfRange(c.longitude));
        }
    }

    let mut seen = HashSet::new();
    for (d, r) in task.images.entries() {
        if !seen.insert(*d) {
            report.push(Violation::DuplicateDirection(*d));
        }
        if r.as_str().trim().is_empty() {
            report.push(Violation::EmptyImageRef(*d));
        }
    }
    for d in Direction::ALL {
        if !seen.contains(&d) {
            report.push(Violation::MissingDirection(d));
        }
    }
    report
}

pub fn validate_captioned(ct: &CaptionedTask) -> ValidationReport {
    let mut report = validate_task(&ct.task);
    for d in Direction::ALL {
        match ct.captions.get(&d) {
            None => report.push(Violation::MissingCaption(d)),
            Some(c) if c.trim().is_empty() => report.push(Violation::EmptyCaption(d)),
            Some(_) => {}
        }
    }
    if ct.address.trim().is_empty() {
        report.push(Violation::EmptyAddress);
    }
    report
}

fn validate_question(q: &Question, index: usize, task_id: &str, report: &mut ValidationReport) {
    if q.text.trim().is_empty() {
        report.push(Violation::EmptyQuestion { index });
    }
    if let Some(s) = q.engaging_score {
        if !(0.0..=1.0).contains(&s) {
            report.push(Violation::ScoreOutOfRange { index, score: s });
        }
    }
    if q.task_id != task_id {
        report.push(Violation::ForeignQuestion {
            index,
            task_id: q.task_id.clone(),
        });
    }
}

/// Validates a record. `threshold` is the filter threshold from the dataset
/// header; `None` means the dataset was not filtered.
pub fn validate_record(record: &DatasetRecord, threshold: Option<f64>) -> ValidationReport {
    let mut report = ValidationReport::default();
    report.extend(validate_captioned(&record.captioned));
    let task_id = record.task_id();
    for (i, q) in record.questions.iter().enumerate() {
        validate_question(q, i, task_id, &mut report);
        if let Some(t) = threshold {
            if !q.engaging_score.is_some_and(|s| s >= t) {
                report.push(Violation::KeptBelowThreshold {
                    index: i,
                    score: q.engaging_score,
                    threshold: t,
                });
            }
        }
    }
    for (i, q) in record.rejected.iter().enumerate() {
        validate_question(q, i, task_id, &mut report);
        if let Some(t) = threshold {
            if !q.engaging_score.is_some_and(|s| s < t) {
                report.push(Violation::RejectedAboveThreshold {
                    index: i,
                    score: q.engaging_score,
                    threshold: t,
                });
            }
        }
    }
    report
}
