//! Image captioning backends.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Duration;

use locavqg_core::text::{collapse_whitespace, nfc};
use locavqg_core::{Direction, ImageRef, LocaVQGTask, RetryPolicy};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ClientError, IngestError};

pub trait Captioner: Send + Sync {
    fn caption(&self, image: &ImageRef) -> Result<String, ClientError>;
    fn id(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaptionerBackend {
    RemoteModel,
    Stub,
}

/// Backend selection plus its free-form configuration.
///
/// `stub` accepts `base_dir` (string) and `overrides` (object of image id →
/// caption). `remote-model` accepts `endpoint` and `base_dir`; its token comes
/// from `HF_API_TOKEN`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptionerHandle {
    pub backend: CaptionerBackend,
    #[serde(default)]
    pub config: serde_json::Value,
}

impl CaptionerHandle {
    pub fn stub() -> Self {
        Self {
            backend: CaptionerBackend::Stub,
            config: serde_json::Value::Null,
        }
    }

    pub fn build(&self) -> Result<Box<dyn Captioner>, IngestError> {
        let base_dir = self.config["base_dir"].as_str().map(PathBuf::from);
        match self.backend {
            CaptionerBackend::Stub => {
                let mut stub = StubCaptioner::new(base_dir);
                if let Some(map) = self.config["overrides"].as_object() {
                    for (k, v) in map {
                        let caption = v.as_str().ok_or_else(|| {
                            IngestError::UnknownBackend(format!("override for {k} is not a string"))
                        })?;
                        stub.overrides.insert(ImageRef::new(k.clone()), caption.to_string());
                    }
                }
                Ok(Box::new(stub))
            }
            CaptionerBackend::RemoteModel => {
                let endpoint = self.config["endpoint"]
                    .as_str()
                    .ok_or_else(|| IngestError::UnknownBackend("remote-model needs config.endpoint".into()))?;
                let remote = RemoteCaptioner::from_env(endpoint, base_dir)
                    .map_err(|e| IngestError::UnknownBackend(e.to_string()))?;
                Ok(Box::new(remote))
            }
        }
    }
}

fn resolve(base_dir: &Option<PathBuf>, image: &ImageRef) -> PathBuf {
    match base_dir {
        Some(b) => b.join(image.as_str()),
        None => PathBuf::from(image.as_str()),
    }
}

fn read_image(base_dir: &Option<PathBuf>, image: &ImageRef) -> Result<Vec<u8>, ClientError> {
    let path = resolve(base_dir, image);
    std::fs::read(&path).map_err(|e| ClientError::Unreadable {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

const SUBJECTS: &[&str] = &[
    "brick building", "parking lot", "row of houses", "city street", "bridge over a river",
    "storefront", "park with trees", "church", "gas station", "office tower",
    "intersection with a traffic light", "residential street", "mural on a wall", "bus stop",
];
const DESCRIPTORS: &[&str] = &[
    "tall", "old", "red", "quiet", "busy", "white", "modern", "small", "colorful", "empty",
];
const CONTEXTS: &[&str] = &[
    "with cars parked in front", "under a cloudy sky", "next to a sidewalk", "surrounded by trees",
    "with people walking by", "on a sunny day", "near a crosswalk", "behind a fence",
];

/// Deterministic captioner: hashes the image bytes into a templated caption.
/// Explicit overrides take precedence and need no file.
#[derive(Debug, Clone, Default)]
pub struct StubCaptioner {
    pub base_dir: Option<PathBuf>,
    pub overrides: BTreeMap<ImageRef, String>,
}

impl StubCaptioner {
    pub fn new(base_dir: Option<PathBuf>) -> Self {
        Self {
            base_dir,
            overrides: BTreeMap::new(),
        }
    }

    pub fn with_override(mut self, image: impl Into<String>, caption: impl Into<String>) -> Self {
        self.overrides.insert(ImageRef::new(image), caption.into());
        self
    }

    pub fn caption_for_bytes(bytes: &[u8]) -> String {
        let d = Sha256::digest(bytes);
        let pick = |i: usize, bank: &[&'static str]| bank[d[i] as usize % bank.len()];
        format!(
            "a {} {} {}",
            pick(0, DESCRIPTORS),
            pick(1, SUBJECTS),
            pick(2, CONTEXTS)
        )
    }
}

impl Captioner for StubCaptioner {
    fn caption(&self, image: &ImageRef) -> Result<String, ClientError> {
        if let Some(c) = self.overrides.get(image) {
            return Ok(c.clone());
        }
        let bytes = read_image(&self.base_dir, image)?;
        Ok(Self::caption_for_bytes(&bytes))
    }

    fn id(&self) -> String {
        "stub-captioner-v1".into()
    }
}

/// Posts raw image bytes to a hosted image-to-text model and reads
/// `[{"generated_text": …}]`.
pub struct RemoteCaptioner {
    endpoint: String,
    token: String,
    base_dir: Option<PathBuf>,
    http: reqwest::blocking::Client,
}

impl RemoteCaptioner {
    pub const KEY_VAR: &'static str = "HF_API_TOKEN";

    pub fn from_env(endpoint: &str, base_dir: Option<PathBuf>) -> Result<Self, ClientError> {
        let token = std::env::var(Self::KEY_VAR).map_err(|_| ClientError::MissingKey(Self::KEY_VAR))?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(|e| ClientError::Http(e.to_string()))?;
        Ok(Self {
            endpoint: endpoint.to_string(),
            token,
            base_dir,
            http,
        })
    }

    pub fn parse_body(body: &serde_json::Value) -> Result<String, ClientError> {
        body[0]["generated_text"]
            .as_str()
            .or_else(|| body["generated_text"].as_str())
            .map(str::to_string)
            .ok_or_else(|| ClientError::Malformed("no generated_text".into()))
    }
}

impl Captioner for RemoteCaptioner {
    fn caption(&self, image: &ImageRef) -> Result<String, ClientError> {
        let bytes = read_image(&self.base_dir, image)?;
        let body: serde_json::Value = self
            .http
            .post(&self.endpoint)
            .bearer_auth(&self.token)
            .body(bytes)
            .send()
            .and_then(|r| r.error_for_status())
            .map_err(|e| ClientError::Http(e.to_string()))?
            .json()
            .map_err(|e| ClientError::Malformed(e.to_string()))?;
        Self::parse_body(&body)
    }

    fn id(&self) -> String {
        format!("remote-captioner:{}", self.endpoint)
    }
}

/// Captions the four images of `task`. Any failure flags the whole task
/// with the direction that failed.
pub fn caption_images(
    task: &LocaVQGTask,
    captioner: &dyn Captioner,
    retry: &RetryPolicy,
) -> Result<BTreeMap<Direction, String>, IngestError> {
    let mut out = BTreeMap::new();
    for d in Direction::ALL {
        let image = task.images.get(d).ok_or_else(|| IngestError::Uncaptioned {
            direction: d,
            reason: "no image".into(),
        })?;
        let caption = retry
            .run(|_| captioner.caption(image))
            .map_err(|e| IngestError::Uncaptioned {
                direction: d,
                reason: e.last.to_string(),
            })?;
        let caption = nfc(&collapse_whitespace(&caption));
        if caption.is_empty() {
            return Err(IngestError::Uncaptioned {
                direction: d,
                reason: "empty caption".into(),
            });
        }
        out.insert(d, caption);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use locavqg_core::{DirectionalImages, GeoCoordinate};

    fn task(imgs: [&str; 4]) -> LocaVQGTask {
        LocaVQGTask {
            task_id: "t".into(),
            coordinate: GeoCoordinate::new(1.0, 1.0),
            images: DirectionalImages::new(imgs[0], imgs[1], imgs[2], imgs[3]),
            city: None,
        }
    }

    #[test]
    fn overrides_give_fixed_captions() {
        let c = StubCaptioner::default()
            .with_override("n", "a church")
            .with_override("e", "a park")
            .with_override("s", "a bridge")
            .with_override("w", "a shop");
        let caps = caption_images(&task(["n", "e", "s", "w"]), &c, &RetryPolicy::immediate(1)).unwrap();
        assert_eq!(caps[&Direction::North], "a church");
        assert_eq!(caps[&Direction::West], "a shop");
    }

    #[test]
    fn byte_hash_captions_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        for (name, bytes) in [("n.jpg", b"aa"), ("e.jpg", b"bb"), ("s.jpg", b"cc"), ("w.jpg", b"aa")] {
            std::fs::write(dir.path().join(name), bytes).unwrap();
        }
        let c = StubCaptioner::new(Some(dir.path().to_path_buf()));
        let t = task(["n.jpg", "e.jpg", "s.jpg", "w.jpg"]);
        let a = caption_images(&t, &c, &RetryPolicy::immediate(1)).unwrap();
        let b = caption_images(&t, &c, &RetryPolicy::immediate(1)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[&Direction::North], a[&Direction::West]);
        assert!(a.values().all(|c| c.starts_with("a ")));
    }

    #[test]
    fn unreadable_file_flags_direction() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["n.jpg", "e.jpg", "w.jpg"] {
            std::fs::write(dir.path().join(name), b"x").unwrap();
        }
        let c = StubCaptioner::new(Some(dir.path().to_path_buf()));
        let err = caption_images(&task(["n.jpg", "e.jpg", "missing.jpg", "w.jpg"]), &c, &RetryPolicy::immediate(2))
            .unwrap_err();
        match err {
            IngestError::Uncaptioned { direction, .. } => assert_eq!(direction, Direction::South),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn handle_builds_stub_with_overrides() {
        let h = CaptionerHandle {
            backend: CaptionerBackend::Stub,
            config: serde_json::json!({"overrides": {"x": "a fountain"}}),
        };
        let c = h.build().unwrap();
        assert_eq!(c.caption(&ImageRef::new("x")).unwrap(), "a fountain");
        let remote = CaptionerHandle {
            backend: CaptionerBackend::RemoteModel,
            config: serde_json::Value::Null,
        };
        assert!(remote.build().is_err());
    }

    #[test]
    fn remote_body_parsing() {
        let body = serde_json::json!([{"generated_text": "a tall building"}]);
        assert_eq!(RemoteCaptioner::parse_body(&body).unwrap(), "a tall building");
        assert!(RemoteCaptioner::parse_body(&serde_json::json!({})).is_err());
    }
}
