//! Plain-text word lists and the noun depth table.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use crate::error::{MetricsError, Result};

/// Case-folded word set. Blank lines and `#` comments are ignored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    words: HashSet<String>,
}

impl Lexicon {
    pub fn from_words<S: AsRef<str>>(words: impl IntoIterator<Item = S>) -> Self {
        Self {
            words: words.into_iter().map(|w| w.as_ref().trim().to_lowercase()).collect(),
        }
    }

    pub fn parse(text: &str) -> Self {
        Self::from_words(text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(Self::parse(&read(path)?))
    }

    pub fn contains(&self, w: &str) -> bool {
        self.words.contains(w)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Built-in abstract-term list.
pub fn builtin_abstract_terms() -> Lexicon {
    Lexicon::parse(include_str!("../data/abstract_terms.txt"))
}

pub fn builtin_stopwords() -> Lexicon {
    Lexicon::parse(include_str!("../data/stopwords.txt"))
}

/// Word to synset depths, read from `word<TAB>d1[,d2...]` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Hierarchy {
    depths: HashMap<String, Vec<u32>>,
}

impl Hierarchy {
    pub fn from_entries<S: AsRef<str>>(entries: impl IntoIterator<Item = (S, Vec<u32>)>) -> Self {
        Self {
            depths: entries
                .into_iter()
                .map(|(w, d)| (w.as_ref().to_lowercase(), d))
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        let mut depths = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| MetricsError::Malformed {
                path: path.to_path_buf(),
                line: i + 1,
                reason: reason.to_string(),
            };
            let (w, ds) = line.split_once('\t').ok_or_else(|| bad("expected word<TAB>depths"))?;
            let ds = ds
                .split(',')
                .map(|d| d.trim().parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| bad(&e.to_string()))?;
            depths.insert(w.trim().to_lowercase(), ds);
        }
        Ok(Self { depths })
    }

    pub fn min_depth(&self, w: &str) -> Option<u32> {
        self.depths.get(w).and_then(|d| d.iter().copied().min())
    }

    pub fn len(&self) -> usize {
        self.depths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depths.is_empty()
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| MetricsError::Io {
        path: path.to_path_buf(),
        source,
    })
}
