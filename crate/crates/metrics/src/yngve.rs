//! Yngve depth over bracketed constituency trees.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MetricsError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Tree {
    Leaf(String),
    Node { label: String, children: Vec<Tree> },
}

impl Tree {
    /// Parses `(S (NP (DT the) (NN cat)) (VP (VBD sat)))`.
    pub fn parse(s: &str) -> Result<Tree> {
        let toks = lex(s);
        let mut pos = 0;
        let t = parse_node(&toks, &mut pos)?;
        if pos != toks.len() {
            return Err(MetricsError::Tree(format!("trailing input in {s:?}")));
        }
        Ok(t)
    }

    pub fn leaves(&self) -> usize {
        match self {
            Tree::Leaf(_) => 1,
            Tree::Node { children, .. } => children.iter().map(Tree::leaves).sum(),
        }
    }

    /// Per-word depths: each branch contributes its distance from the
    /// rightmost sibling (rightmost 0, next 1, ...).
    pub fn word_depths(&self) -> Vec<usize> {
        let mut out = Vec::new();
        walk(self, 0, &mut out);
        out
    }
}

fn walk(t: &Tree, depth: usize, out: &mut Vec<usize>) {
    match t {
        Tree::Leaf(_) => out.push(depth),
        Tree::Node { children, .. } => {
            let n = children.len();
            for (i, c) in children.iter().enumerate() {
                walk(c, depth + (n - 1 - i), out);
            }
        }
    }
}

fn lex(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in s.chars() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        } else {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn parse_node(toks: &[String], pos: &mut usize) -> Result<Tree> {
    let err = |m: &str| MetricsError::Tree(m.to_string());
    if toks.get(*pos).map(String::as_str) != Some("(") {
        return Err(err("expected '('"));
    }
    *pos += 1;
    let label = match toks.get(*pos) {
        Some(t) if t != "(" && t != ")" => t.clone(),
        _ => return Err(err("missing label")),
    };
    *pos += 1;
    let mut children = Vec::new();
    loop {
        match toks.get(*pos).map(String::as_str) {
            None => return Err(err("unbalanced parentheses")),
            Some(")") => {
                *pos += 1;
                break;
            }
            Some("(") => children.push(parse_node(toks, pos)?),
            Some(w) => {
                children.push(Tree::Leaf(w.to_string()));
                *pos += 1;
            }
        }
    }
    if children.is_empty() {
        return Err(err("empty constituent"));
    }
    Ok(Tree::Node { label, children })
}

/// Sum of word depths divided by the number of words.
pub fn normalized_yngve(t: &Tree) -> f64 {
    let d = t.word_depths();
    d.iter().sum::<usize>() as f64 / d.len() as f64
}

/// Produces bracketed parses for sentences.
pub trait ConstituencyParser {
    fn parse(&self, sentence: &str) -> Option<String>;
    fn id(&self) -> String;
}

/// Looks parses up in a `sentence<TAB>tree` file produced by an external parser.
#[derive(Debug, Clone, Default)]
pub struct ParseFile {
    map: HashMap<String, String>,
}

impl ParseFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| MetricsError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut map = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (s, t) = line.split_once('\t').ok_or_else(|| MetricsError::Malformed {
                path: path.to_path_buf(),
                line: i + 1,
                reason: "expected sentence<TAB>tree".into(),
            })?;
            map.insert(s.trim().to_string(), t.trim().to_string());
        }
        Ok(Self { map })
    }
}

impl ConstituencyParser for ParseFile {
    fn parse(&self, sentence: &str) -> Option<String> {
        self.map.get(sentence.trim()).cloned()
    }

    fn id(&self) -> String {
        "parse-file".into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YngveReport {
    pub mean: Option<f64>,
    pub scored: usize,
    pub skipped: usize,
    pub parser: String,
}

/// Mean normalized score over sentences; missing or broken parses are skipped.
pub fn yngve<S: AsRef<str>>(sentences: &[S], parser: &dyn ConstituencyParser) -> YngveReport {
    let mut sum = 0.0;
    let (mut scored, mut skipped) = (0, 0);
    for s in sentences {
        match parser.parse(s.as_ref()).map(|p| Tree::parse(&p)) {
            Some(Ok(t)) => {
                sum += normalized_yngve(&t);
                scored += 1;
            }
            _ => {
                log::debug!("yngve: no usable parse for {:?}", s.as_ref());
                skipped += 1;
            }
        }
    }
    YngveReport {
        mean: (scored > 0).then(|| sum / scored as f64),
        scored,
        skipped,
        parser: parser.id(),
    }
}
