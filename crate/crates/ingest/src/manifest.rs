//! Manifest file: CSV with columns
//! `task_id,lat,lon,north,east,south,west[,city]` in that order. A header
//! row starting with `task_id` is optional.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use locavqg_core::text::nfc;
use locavqg_core::{validate_task, Direction, DirectionalImages, GeoCoordinate, ImageRef, LocaVQGTask};

use crate::error::IngestError;

pub const MANIFEST_COLUMNS: [&str; 8] = ["task_id", "lat", "lon", "north", "east", "south", "west", "city"];

/// A manifest row that was readable but rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub line: usize,
    pub task_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ManifestLoad {
    pub tasks: Vec<LocaVQGTask>,
    pub row_errors: Vec<RowError>,
}

fn parse_coord(field: Option<&str>, name: &str, line: usize) -> Result<f64, IngestError> {
    let raw = field.map(str::trim).unwrap_or("");
    raw.parse::<f64>().map_err(|_| IngestError::Malformed {
        line,
        reason: format!("{name} {raw:?} is not a number"),
    })
}

pub fn read_manifest<R: Read>(reader: R) -> Result<ManifestLoad, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = ManifestLoad::default();
    let mut seen = HashSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| IngestError::Malformed {
            line: e.position().map_or(i + 1, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if i == 0 && rec.get(0) == Some("task_id") {
            continue;
        }
        if rec.len() < 3 {
            return Err(IngestError::Malformed {
                line,
                reason: format!("expected at least task_id,lat,lon; got {} fields", rec.len()),
            });
        }
        let task_id = nfc(rec.get(0).unwrap_or(""));
        let latitude = parse_coord(rec.get(1), "lat", line)?;
        let longitude = parse_coord(rec.get(2), "lon", line)?;

        let mut entries = Vec::with_capacity(4);
        let mut missing = Vec::new();
        for (k, d) in Direction::ALL.iter().enumerate() {
            match rec.get(3 + k).filter(|s| !s.is_empty()) {
                Some(p) => entries.push((*d, ImageRef::new(nfc(p)))),
                None => missing.push(*d),
            }
        }
        if !missing.is_empty() {
            let names: Vec<String> = missing.iter().map(|d| format!("missing direction {d}")).collect();
            out.row_errors.push(RowError {
                line,
                task_id,
                reason: names.join("; "),
            });
            continue;
        }
        let city = rec.get(7).filter(|s| !s.is_empty()).map(nfc);
        let task = LocaVQGTask {
            task_id: task_id.clone(),
            coordinate: GeoCoordinate::new(latitude, longitude),
            images: DirectionalImages::from_entries(entries),
            city,
        };
        let report = validate_task(&task);
        if !report.is_ok() {
            out.row_errors.push(RowError {
                line,
                task_id,
                reason: report.to_string(),
            });
            continue;
        }
        if !seen.insert(task_id.clone()) {
            out.row_errors.push(RowError {
                line,
                task_id,
                reason: "duplicate task id".into(),
            });
            continue;
        }
        out.tasks.push(task);
    }
    Ok(out)
}

pub fn load_manifest(path: &Path) -> Result<ManifestLoad, IngestError> {
    let f = File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_manifest(f)
}

pub fn write_manifest<W: Write>(tasks: &[LocaVQGTask], w: W) -> Result<(), IngestError> {
    let mut wtr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| IngestError::Io {
        path: "<manifest>".into(),
        source: std::io::Error::other(e),
    };
    wtr.write_record(MANIFEST_COLUMNS).map_err(io)?;
    for t in tasks {
        let img = |d| t.images.get(d).map_or("", ImageRef::as_str).to_string();
        wtr.write_record([
            t.task_id.clone(),
            t.coordinate.latitude.to_string(),
            t.coordinate.longitude.to_string(),
            img(Direction::North),
            img(Direction::East),
            img(Direction::South),
            img(Direction::West),
            t.city.clone().unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    wtr.flush().map_err(|source| IngestError::Io {
        path: "<manifest>".into(),
        source,
    })
}
