//! Street-view manifest loading, cached reverse geocoding and pluggable
//! captioning, producing [`CaptionedTask`](locavqg_core::CaptionedTask)s.

pub mod caption;
pub mod error;
pub mod geocode;
pub mod manifest;
pub mod pipeline;

pub use caption::{caption_images, Captioner, CaptionerBackend, CaptionerHandle, RemoteCaptioner, StubCaptioner};
pub use error::{ClientError, IngestError};
pub use geocode::{reverse_geocode, CacheKey, GeocodeCache, Geocoder, GoogleGeocoder, StubGeocoder};
pub use manifest::{load_manifest, read_manifest, write_manifest, ManifestLoad, RowError};
pub use pipeline::{ingest_tasks, surviving_ids, FlagReason, FlaggedTask, IngestContext, IngestOutcome};
