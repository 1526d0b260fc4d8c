//! Core domain types for location-aware engaging question generation:
//! task tuples, captioned tasks, questions, dataset records, their
//! validation, and the newline-delimited dataset file format.

pub mod dataset;
pub mod error;
pub mod ratelimit;
pub mod retry;
pub mod scalar;
pub mod scoring;
pub mod text;
pub mod types;
pub mod validate;

pub use dataset::{deserialize_record, serialize_record, Dataset, DatasetHeader, SCHEMA_VERSION};
pub use error::{CoreError, Result};
pub use ratelimit::TokenBucket;
pub use retry::{RetryError, RetryPolicy};
pub use scalar::Scalar;
pub use scoring::EngagementScorer;
pub use types::{
    infer_city, CaptionedTask, DatasetRecord, Direction, DirectionalImages, GeoCoordinate,
    ImageRef, LocaVQGTask, Question, QuestionSource,
};
pub use validate::{validate_captioned, validate_record, validate_task, ValidationReport, Violation};

/// Default engagingness decision threshold.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Single-precision scalar used for model weights.
pub type F32 = f32;
/// Double-precision scalar used for metrics and gradient checks.
pub type F64 = f64;
