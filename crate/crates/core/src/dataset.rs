//! Newline-delimited dataset file: a header line followed by one
//! [`DatasetRecord`] per line.
//!
//! ```text
//! {"kind":"header","schema_version":1,"threshold":0.5,...}
//! {"kind":"record","captioned":{...},"questions":[...],"rejected":[...]}
//! ```

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::types::DatasetRecord;
use crate::validate::validate_record;

pub const SCHEMA_VERSION: u32 = 1;

/// Dataset-level metadata written as the first line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub schema_version: u32,
    /// Engagingness threshold used for filtering; `None` for an unfiltered dataset.
    pub threshold: Option<f64>,
    pub scorer: String,
    #[serde(default)]
    pub generator: BTreeMap<String, serde_json::Value>,
}

impl DatasetHeader {
    pub fn new(threshold: Option<f64>, scorer: impl Into<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            threshold,
            scorer: scorer.into(),
            generator: BTreeMap::new(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Line<H, R> {
    Header(H),
    Record(R),
}

fn to_line<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(CoreError::Serialize)
}

pub fn serialize_header(header: &DatasetHeader) -> Result<String> {
    to_line(&Line::<&DatasetHeader, ()>::Header(header))
}

/// Serializes one record to a single line (no trailing newline).
pub fn serialize_record(record: &DatasetRecord) -> Result<String> {
    to_line(&Line::<(), &DatasetRecord>::Record(record))
}

pub fn deserialize_record(line: &str) -> std::result::Result<DatasetRecord, serde_json::Error> {
    match serde_json::from_str::<Line<serde::de::IgnoredAny, DatasetRecord>>(line)? {
        Line::Record(r) => Ok(r),
        Line::Header(_) => Err(serde::de::Error::custom("expected a record, found a header")),
    }
}

/// A parsed dataset file.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub records: Vec<DatasetRecord>,
}

impl Dataset {
    pub fn question_count(&self) -> usize {
        self.records.iter().map(|r| r.questions.len()).sum()
    }

    /// Task count per city; records without a city are grouped under "".
    pub fn city_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for r in &self.records {
            let city = r.captioned.task.city.clone().unwrap_or_default();
            *out.entry(city).or_insert(0) += 1;
        }
        out
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e| CoreError::io("<writer>", e);
        writeln!(w, "{}", serialize_header(&self.header)?).map_err(io)?;
        for r in &self.records {
            writeln!(w, "{}", serialize_record(r)?).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| CoreError::io(path, e))?;
        self.write_to(BufWriter::new(f))
    }

    /// Reads and validates every record against the header threshold.
    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut header = None;
        let mut records = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| CoreError::io("<reader>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Line<DatasetHeader, DatasetRecord> = serde_json::from_str(&line)
                .map_err(|source| CoreError::Json {
                    line: lineno,
                    source,
                })?;
            match parsed {
                Line::Header(h) if header.is_none() && records.is_empty() => header = Some(h),
                Line::Header(_) => {
                    return Err(CoreError::Unexpected {
                        line: lineno,
                        found: "second header",
                    })
                }
                Line::Record(rec) => {
                    let Some(h) = header.as_ref() else {
                        return Err(CoreError::MissingHeader);
                    };
                    let report = validate_record(&rec, h.threshold);
                    if !report.is_ok() {
                        return Err(CoreError::Invalid {
                            line: lineno,
                            report,
                        });
                    }
                    records.push(rec);
                }
            }
        }
        let header = header.ok_or(CoreError::MissingHeader)?;
        Ok(Self { header, records })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| CoreError::io(path, e))?;
        Self::read_from(BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::*;

    fn record(id: &str, city: Option<&str>, questions: &[&str]) -> DatasetRecord {
        let captions = Direction::ALL
            .iter()
            .map(|d| (*d, format!("a street facing {d}")))
            .collect();
        DatasetRecord {
            captioned: CaptionedTask {
                task: LocaVQGTask {
                    task_id: id.to_string(),
                    coordinate: GeoCoordinate::new(40.44, -79.99),
                    images: DirectionalImages::new("n.jpg", "e.jpg", "s.jpg", "w.jpg"),
                    city: city.map(str::to_string),
                },
                captions,
                address: "1250 Penn Ave, Pittsburgh, PA 15222, USA".into(),
            },
            questions: questions
                .iter()
                .map(|q| Question::new(*q, QuestionSource::Llm, id).with_score(0.9))
                .collect(),
            rejected: vec![],
        }
    }

    #[test]
    fn three_questions_round_trip() {
        let r = record("a", None, &["One?", "Two?", "Three?"]);
        let line = serialize_record(&r).unwrap();
        let back = deserialize_record(&line).unwrap();
        assert_eq!(back.questions.len(), 3);
        assert_eq!(back, r);
    }

    #[test]
    fn quotes_and_newlines_are_escaped() {
        let r = record("a", None, &["Is it the \"City of Bridges\"?\nReally?"]);
        let line = serialize_record(&r).unwrap();
        assert!(!line.contains('\n'));
        assert_eq!(deserialize_record(&line).unwrap(), r);
    }

    #[test]
    fn header_is_required() {
        let line = serialize_record(&record("a", None, &["Q?"])).unwrap();
        let err = Dataset::read_from(line.as_bytes()).unwrap_err();
        assert!(matches!(err, CoreError::MissingHeader));
    }

    #[test]
    fn records_violating_threshold_are_rejected_on_read() {
        let mut r = record("a", None, &["Q?"]);
        r.questions[0].engaging_score = Some(0.2);
        let ds = Dataset {
            header: DatasetHeader::new(Some(0.5), "stub"),
            records: vec![r],
        };
        let mut buf = Vec::new();
        ds.write_to(&mut buf).unwrap();
        let err = Dataset::read_from(buf.as_slice()).unwrap_err();
        assert!(matches!(err, CoreError::Invalid { line: 2, .. }));
    }

    #[test]
    fn city_counts_survive_a_full_size_round_trip() {
        let mut records = Vec::new();
        // the three named cities account for 3747 of the 3759 tuples
        for (city, n) in [("Pittsburgh", 919), ("Orlando", 611), ("New York", 2217), ("", 12)] {
            let city = (!city.is_empty()).then_some(city);
            for i in 0..n {
                let id = format!("{}-{i}", city.unwrap_or("other"));
                records.push(record(&id, city, &["Can you guess?"]));
            }
        }
        assert_eq!(records.len(), 3759);
        let ds = Dataset {
            header: DatasetHeader::new(Some(0.5), "stub"),
            records,
        };
        let mut buf = Vec::new();
        ds.write_to(&mut buf).unwrap();
        let back = Dataset::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, ds);
        let counts = back.city_counts();
        assert_eq!(counts["Pittsburgh"], 919);
        assert_eq!(counts["Orlando"], 611);
        assert_eq!(counts["New York"], 2217);
        assert_eq!(counts[""], 12);
    }
}
