//! Values that flow through the pipeline: task tuples, captioned tasks,
//! questions and dataset records.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Latitude/longitude in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoCoordinate {
    pub latitude: f64,
    pub longitude: f64,
}

impl GeoCoordinate {
    pub fn new(latitude: f64, longitude: f64) -> Self {
        Self {
            latitude,
            longitude,
        }
    }

    pub fn latitude_in_range(&self) -> bool {
        (-90.0..=90.0).contains(&self.latitude)
    }

    pub fn longitude_in_range(&self) -> bool {
        (-180.0..=180.0).contains(&self.longitude)
    }

    pub fn is_valid(&self) -> bool {
        self.latitude_in_range() && self.longitude_in_range()
    }
}

impl fmt::Display for GeoCoordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6},{:.6}", self.latitude, self.longitude)
    }
}

/// Compass direction of a street-view image. Ordering is N, E, S, W.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::North => "north",
            Direction::East => "east",
            Direction::South => "south",
            Direction::West => "west",
        }
    }

    /// Capitalized form used inside prompts ("North").
    pub fn title(self) -> &'static str {
        match self {
            Direction::North => "North",
            Direction::East => "East",
            Direction::South => "South",
            Direction::West => "West",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "n" | "north" => Ok(Direction::North),
            "e" | "east" => Ok(Direction::East),
            "s" | "south" => Ok(Direction::South),
            "w" | "west" => Ok(Direction::West),
            other => Err(format!("unknown direction {other:?}")),
        }
    }
}

/// Reference to a street-view image: a file path or an opaque id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ImageRef(pub String);

impl ImageRef {
    pub fn new(s: impl Into<String>) -> Self {
        Self(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ImageRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The four directional images of a location.
///
/// Entries are kept as given so that malformed inputs (a duplicated or
/// missing direction) survive deserialization and can be reported by
/// [`crate::validate_task`]. Serialized as a JSON object keyed by direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionalImages {
    entries: Vec<(Direction, ImageRef)>,
}

impl DirectionalImages {
    pub fn new(
        north: impl Into<String>,
        east: impl Into<String>,
        south: impl Into<String>,
        west: impl Into<String>,
    ) -> Self {
        Self {
            entries: vec![
                (Direction::North, ImageRef::new(north)),
                (Direction::East, ImageRef::new(east)),
                (Direction::South, ImageRef::new(south)),
                (Direction::West, ImageRef::new(west)),
            ],
        }
    }

    /// Builds from arbitrary entries without checking them.
    pub fn from_entries(entries: Vec<(Direction, ImageRef)>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[(Direction, ImageRef)] {
        &self.entries
    }

    pub fn get(&self, direction: Direction) -> Option<&ImageRef> {
        self.entries
            .iter()
            .find(|(d, _)| *d == direction)
            .map(|(_, r)| r)
    }
}

impl Serialize for DirectionalImages {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.entries.len()))?;
        for (d, r) in &self.entries {
            map.serialize_entry(d, r)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for DirectionalImages {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct EntriesVisitor;

        impl<'de> Visitor<'de> for EntriesVisitor {
            type Value = DirectionalImages;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map from direction to image reference")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut entries = Vec::with_capacity(4);
                while let Some((d, r)) = access.next_entry::<Direction, ImageRef>()? {
                    entries.push((d, r));
                }
                Ok(DirectionalImages { entries })
            }
        }

        deserializer.deserialize_map(EntriesVisitor)
    }
}

/// One task tuple: four directional images plus the coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocaVQGTask {
    pub task_id: String,
    pub coordinate: GeoCoordinate,
    pub images: DirectionalImages,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub city: Option<String>,
}

/// A task enriched with per-direction captions and its street address.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptionedTask {
    pub task: LocaVQGTask,
    pub captions: BTreeMap<Direction, String>,
    pub address: String,
}

impl CaptionedTask {
    pub fn caption(&self, direction: Direction) -> &str {
        self.captions
            .get(&direction)
            .map(String::as_str)
            .unwrap_or("")
    }

    pub fn task_id(&self) -> &str {
        &self.task.task_id
    }
}

/// Where a question came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionSource {
    Llm,
    Student,
    Teacher,
    Human,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engaging_score: Option<f64>,
    pub source: QuestionSource,
    pub task_id: String,
}

impl Question {
    pub fn new(text: impl Into<String>, source: QuestionSource, task_id: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            engaging_score: None,
            source,
            task_id: task_id.into(),
        }
    }

    pub fn with_score(mut self, score: f64) -> Self {
        self.engaging_score = Some(score);
        self
    }
}

/// A captioned task with its kept questions (the labels) and the rejected ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub captioned: CaptionedTask,
    pub questions: Vec<Question>,
    #[serde(default)]
    pub rejected: Vec<Question>,
}

impl DatasetRecord {
    pub fn task_id(&self) -> &str {
        self.captioned.task_id()
    }
}

/// Picks the first configured city whose name occurs in `address`
/// (case-insensitive).
pub fn infer_city(address: &str, cities: &[String]) -> Option<String> {
    let lowered = address.to_lowercase();
    cities
        .iter()
        .find(|c| !c.trim().is_empty() && lowered.contains(&c.to_lowercase()))
        .cloned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn images_serialize_as_ordered_map() {
        let imgs = DirectionalImages::new("n.jpg", "e.jpg", "s.jpg", "w.jpg");
        let json = serde_json::to_string(&imgs).unwrap();
        assert_eq!(
            json,
            r#"{"north":"n.jpg","east":"e.jpg","south":"s.jpg","west":"w.jpg"}"#
        );
        let back: DirectionalImages = serde_json::from_str(&json).unwrap();
        assert_eq!(back, imgs);
    }

    #[test]
    fn duplicate_direction_keys_survive_deserialization() {
        let json = r#"{"north":"a","north":"b","south":"c","west":"d"}"#;
        let imgs: DirectionalImages = serde_json::from_str(json).unwrap();
        assert_eq!(imgs.entries().len(), 4);
        assert!(imgs.get(Direction::East).is_none());
    }

    #[test]
    fn city_inference_is_substring_based() {
        let cities = vec!["Pittsburgh".to_string(), "Orlando".to_string()];
        assert_eq!(
            infer_city("1250 Penn Ave, Pittsburgh, PA 15222, USA", &cities).as_deref(),
            Some("Pittsburgh")
        );
        assert_eq!(infer_city("5th Ave, New York, NY", &cities), None);
    }

    #[test]
    fn direction_parses_short_and_long_forms() {
        assert_eq!("W".parse::<Direction>().unwrap(), Direction::West);
        assert_eq!("north".parse::<Direction>().unwrap(), Direction::North);
        assert!("up".parse::<Direction>().is_err());
    }
}
