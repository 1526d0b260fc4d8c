use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::embedding::MetricValue;
use crate::error::{MetricsError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricEntry {
    #[serde(flatten)]
    pub value: MetricValue,
    pub config: Value,
}

/// Metric name to value and the configuration that produced it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metrics: BTreeMap<String, MetricEntry>,
}

impl MetricReport {
    /// Rejects non-finite values.
    pub fn insert(&mut self, name: &str, value: MetricValue, config: Value) -> Result<()> {
        if let MetricValue::Value(v) = value {
            if !v.is_finite() {
                return Err(MetricsError::NonFinite {
                    name: name.to_string(),
                    value: v,
                });
            }
        }
        self.metrics.insert(name.to_string(), MetricEntry { value, config });
        Ok(())
    }

    pub fn set(&mut self, name: &str, v: f64, config: Value) -> Result<()> {
        self.insert(name, MetricValue::Value(v), config)
    }

    pub fn get(&self, name: &str) -> Option<&MetricValue> {
        self.metrics.get(name).map(|e| &e.value)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|source| MetricsError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| MetricsError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let r: Self = serde_json::from_str(&text).map_err(|source| MetricsError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        for (name, e) in &r.metrics {
            if let MetricValue::Value(v) = e.value {
                if !v.is_finite() {
                    return Err(MetricsError::NonFinite { name: name.clone(), value: v });
                }
            }
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn round_trip_and_finiteness() {
        let mut r = MetricReport::default();
        r.set("bleu4", 0.25, json!({"smoothing": "add-one"})).unwrap();
        r.insert("bleurt", MetricValue::Unavailable("none".into()), json!({})).unwrap();
        assert!(r.set("bad", f64::NAN, json!({})).is_err());
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        r.save(&p).unwrap();
        assert_eq!(MetricReport::load(&p).unwrap(), r);
        assert!(r.to_json().contains("\"unavailable\": \"none\""));
    }
}
