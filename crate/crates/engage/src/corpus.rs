use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EngageError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Engaging,
    NonEngaging,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Engaging => "engaging",
            Label::NonEngaging => "non_engaging",
        }
    }

    pub fn target(self) -> f64 {
        match self {
            Label::Engaging => 1.0,
            Label::NonEngaging => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Mvqg,
    Squad,
    Synthetic,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Mvqg => "mvqg",
            Origin::Squad => "squad",
            Origin::Synthetic => "synthetic",
        }
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "engaging" => Ok(Label::Engaging),
            "non_engaging" => Ok(Label::NonEngaging),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

impl FromStr for Origin {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mvqg" => Ok(Origin::Mvqg),
            "squad" => Ok(Origin::Squad),
            "synthetic" => Ok(Origin::Synthetic),
            other => Err(format!("unknown origin {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledQuestion {
    pub text: String,
    pub label: Label,
    pub origin: Origin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.8,
            val: 0.1,
            test: 0.1,
        }
    }
}

impl SplitFractions {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(EngageError::InvalidConfig(format!(
                "split fractions must lie in [0, 1]: {self:?}"
            )));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(EngageError::InvalidConfig(format!(
                "split fractions must sum to 1: {self:?}"
            )));
        }
        Ok(())
    }

    /// Partition sizes for `n` items. Train and val are rounded; test takes the rest.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let train = (((n as f64) * self.train).round() as usize).min(n);
        let val = (((n as f64) * self.val).round() as usize).min(n - train);
        (train, val, n - train - val)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub train: Vec<LabeledQuestion>,
    pub val: Vec<LabeledQuestion>,
    pub test: Vec<LabeledQuestion>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.train.len() + self.val.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn split(&self, s: Split) -> &[LabeledQuestion] {
        match s {
            Split::Train => &self.train,
            Split::Val => &self.val,
            Split::Test => &self.test,
        }
    }

    fn split_mut(&mut self, s: Split) -> &mut Vec<LabeledQuestion> {
        match s {
            Split::Train => &mut self.train,
            Split::Val => &mut self.val,
            Split::Test => &mut self.test,
        }
    }

    /// One line per question: `split<TAB>label<TAB>origin<TAB>text`.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for s in Split::ALL {
            for q in self.split(s) {
                let text = q.text.replace(['\t', '\n', '\r'], " ");
                writeln!(w, "{}\t{}\t{}\t{}", s, q.label.as_str(), q.origin.as_str(), text)?;
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let io = |source| EngageError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        self.write_to(&mut f).map_err(io)?;
        f.flush().map_err(io)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let io = |source| EngageError::Io {
            path: path.to_path_buf(),
            source,
        };
        let reader = BufReader::new(std::fs::File::open(path).map_err(io)?);
        let mut corpus = Corpus::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(io)?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |reason: String| EngageError::Malformed {
                path: path.to_path_buf(),
                line: i + 1,
                reason,
            };
            let mut parts = line.splitn(4, '\t');
            let (Some(s), Some(l), Some(o), Some(text)) =
                (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(bad("expected 4 tab-separated fields".into()));
            };
            let split: Split = s.parse().map_err(bad)?;
            let label: Label = l.parse().map_err(bad)?;
            let origin: Origin = o.parse().map_err(bad)?;
            if text.trim().is_empty() {
                return Err(bad("empty question text".into()));
            }
            corpus.split_mut(split).push(LabeledQuestion {
                text: text.to_string(),
                label,
                origin,
            });
        }
        Ok(corpus)
    }
}

/// Labels `negatives` as non-engaging and `positives` as engaging, shuffles
/// with `seed` and partitions by `fractions`. Blank entries are dropped.
pub fn build_corpus(
    negatives: &[String],
    negative_origin: Origin,
    positives: &[String],
    positive_origin: Origin,
    fractions: SplitFractions,
    seed: u64,
) -> Result<Corpus> {
    fractions.validate()?;
    let clean = |xs: &[String]| -> Vec<String> {
        xs.iter()
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    };
    let neg = clean(negatives);
    let pos = clean(positives);
    if neg.is_empty() {
        return Err(EngageError::EmptyInput("negative"));
    }
    if pos.is_empty() {
        return Err(EngageError::EmptyInput("positive"));
    }
    let mut all: Vec<LabeledQuestion> = neg
        .into_iter()
        .map(|text| LabeledQuestion {
            text,
            label: Label::NonEngaging,
            origin: negative_origin,
        })
        .chain(pos.into_iter().map(|text| LabeledQuestion {
            text,
            label: Label::Engaging,
            origin: positive_origin,
        }))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    all.shuffle(&mut rng);
    let (n_train, n_val, _) = fractions.sizes(all.len());
    let test = all.split_off(n_train + n_val);
    let val = all.split_off(n_train);
    Ok(Corpus {
        train: all,
        val,
        test,
    })
}

/// Reads one question per non-blank line.
pub fn read_question_list(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|source| EngageError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}
