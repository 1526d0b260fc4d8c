//! Reverse geocoding behind a persistent coordinate cache.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use locavqg_core::{GeoCoordinate, RetryPolicy, TokenBucket};
use parking_lot::RwLock;

use crate::error::{ClientError, IngestError};

/// Coordinate rounded to 6 decimal places, stored as integer micro-degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CacheKey {
    lat_micro: i64,
    lon_micro: i64,
}

impl CacheKey {
    pub fn of(c: GeoCoordinate) -> Self {
        Self {
            lat_micro: (c.latitude * 1e6).round() as i64,
            lon_micro: (c.longitude * 1e6).round() as i64,
        }
    }

    fn fmt_micro(v: i64) -> String {
        let sign = if v < 0 { "-" } else { "" };
        let a = v.unsigned_abs();
        format!("{sign}{}.{:06}", a / 1_000_000, a % 1_000_000)
    }

    fn parse_micro(s: &str) -> Option<i64> {
        let v: f64 = s.parse().ok()?;
        Some((v * 1e6).round() as i64)
    }
}

/// Address cache keyed by rounded coordinate. Readers share a lock;
/// inserts take it exclusively. Persisted as a sorted
/// `lat<TAB>lon<TAB>address` text file.
#[derive(Debug, Default)]
pub struct GeocodeCache {
    entries: RwLock<BTreeMap<CacheKey, String>>,
    path: Option<PathBuf>,
}

impl GeocodeCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads `path` if it exists; [`save`](Self::save) writes back to it.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, IngestError> {
        let path = path.into();
        let mut map = BTreeMap::new();
        if path.exists() {
            let text = fs::read_to_string(&path).map_err(|source| IngestError::Io {
                path: path.clone(),
                source,
            })?;
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let mut parts = line.splitn(3, '\t');
                let (Some(lat), Some(lon), Some(addr)) = (parts.next(), parts.next(), parts.next()) else {
                    return Err(IngestError::BadCache {
                        line: i + 1,
                        reason: "expected lat<TAB>lon<TAB>address".into(),
                    });
                };
                let (Some(lat_micro), Some(lon_micro)) = (CacheKey::parse_micro(lat), CacheKey::parse_micro(lon)) else {
                    return Err(IngestError::BadCache {
                        line: i + 1,
                        reason: "bad coordinate".into(),
                    });
                };
                map.insert(CacheKey { lat_micro, lon_micro }, addr.to_string());
            }
        }
        Ok(Self {
            entries: RwLock::new(map),
            path: Some(path),
        })
    }

    pub fn get(&self, c: GeoCoordinate) -> Option<String> {
        self.entries.read().get(&CacheKey::of(c)).cloned()
    }

    pub fn insert(&self, c: GeoCoordinate, address: impl Into<String>) {
        let address: String = address.into();
        self.entries
            .write()
            .insert(CacheKey::of(c), address.replace(['\n', '\r', '\t'], " "));
    }

    pub fn len(&self) -> usize {
        self.entries.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries.read().iter() {
            out.push_str(&CacheKey::fmt_micro(k.lat_micro));
            out.push('\t');
            out.push_str(&CacheKey::fmt_micro(k.lon_micro));
            out.push('\t');
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn save_to(&self, path: &Path) -> Result<(), IngestError> {
        let io = |source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(io)?;
        }
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, self.to_text()).map_err(io)?;
        fs::rename(&tmp, path).map_err(io)
    }

    /// Writes to the path given at [`open`](Self::open); no-op for in-memory caches.
    pub fn save(&self) -> Result<(), IngestError> {
        match &self.path {
            Some(p) => self.save_to(p),
            None => Ok(()),
        }
    }
}

pub trait Geocoder: Send + Sync {
    fn reverse(&self, coord: GeoCoordinate) -> Result<String, ClientError>;
    fn id(&self) -> String;
}

/// Offline geocoder: a fixed table with an optional fallback template
/// (`{lat}`/`{lon}` placeholders).
#[derive(Debug, Clone, Default)]
pub struct StubGeocoder {
    pub table: BTreeMap<CacheKey, String>,
    pub fallback: Option<String>,
}

impl StubGeocoder {
    pub fn constant(address: impl Into<String>) -> Self {
        Self {
            table: BTreeMap::new(),
            fallback: Some(address.into()),
        }
    }

    pub fn with_entry(mut self, c: GeoCoordinate, address: impl Into<String>) -> Self {
        self.table.insert(CacheKey::of(c), address.into());
        self
    }
}

impl Geocoder for StubGeocoder {
    fn reverse(&self, coord: GeoCoordinate) -> Result<String, ClientError> {
        if let Some(a) = self.table.get(&CacheKey::of(coord)) {
            return Ok(a.clone());
        }
        match &self.fallback {
            Some(t) => Ok(t
                .replace("{lat}", &format!("{:.6}", coord.latitude))
                .replace("{lon}", &format!("{:.6}", coord.longitude))),
            None => Err(ClientError::Other(format!("no address for {coord}"))),
        }
    }

    fn id(&self) -> String {
        "stub-geocoder".into()
    }
}

/// Google Maps reverse-geocoding adapter; key from `GOOGLE_MAPS_API_KEY`.
pub struct GoogleGeocoder {
    api_key: String,
    endpoint: String,
    http: reqwest::blocking::Client,
}

impl GoogleGeocoder {
    pub const KEY_VAR: &'static str = "GOOGLE_MAPS_API_KEY";

    pub fn from_env() -> Result<Self, ClientError> {
        let key = std::env::var(Self::KEY_VAR).map_err(|_| ClientError::MissingKey(Self::KEY_VAR))?;
        Self::new(key, "https://maps.googleapis.com/maps/api/geocode/json")
    }

    pub fn new(api_key: impl Into<String>, endpoint: impl Into<String>) -> Result<Self, ClientError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| ClientError::Http(e.to_string()))?;
        Ok(Self {
            api_key: api_key.into(),
            endpoint: endpoint.into(),
            http,
        })
    }

    /// Extracts the first formatted address from a geocoding response body.
    pub fn parse_body(body: &serde_json::Value) -> Result<String, ClientError> {
        let status = body["status"].as_str().unwrap_or("");
        if status != "OK" {
            return Err(ClientError::Status(status.to_string()));
        }
        body["results"][0]["formatted_address"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| ClientError::Malformed("no results[0].formatted_address".into()))
    }
}

impl Geocoder for GoogleGeocoder {
    fn reverse(&self, coord: GeoCoordinate) -> Result<String, ClientError> {
        let latlng = format!("{:.6},{:.6}", coord.latitude, coord.longitude);
        let body: serde_json::Value = self
            .http
            .get(&self.endpoint)
            .query(&[("latlng", latlng.as_str()), ("key", self.api_key.as_str())])
            .send()
            .and_then(|r| r.error_for_status())
            .map_err(|e| ClientError::Http(e.to_string()))?
            .json()
            .map_err(|e| ClientError::Malformed(e.to_string()))?;
        Self::parse_body(&body)
    }

    fn id(&self) -> String {
        "google-geocoding".into()
    }
}

/// Cached reverse geocoding: a hit makes no client call; a miss calls the
/// client (with retries) once and stores the result.
pub fn reverse_geocode(
    coord: GeoCoordinate,
    cache: &GeocodeCache,
    client: &dyn Geocoder,
    retry: &RetryPolicy,
    limiter: &TokenBucket,
) -> Result<String, IngestError> {
    if let Some(hit) = cache.get(coord) {
        return Ok(hit);
    }
    let address = retry
        .run(|_| {
            limiter.acquire();
            client.reverse(coord)
        })
        .map_err(|e| IngestError::Ungeocoded(format!("{coord}: {e}")))?;
    let address = locavqg_core::text::nfc(address.trim());
    if address.is_empty() {
        return Err(IngestError::Ungeocoded(format!("{coord}: empty address")));
    }
    cache.insert(coord, address.clone());
    Ok(address)
}
