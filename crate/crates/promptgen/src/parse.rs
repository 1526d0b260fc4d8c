use std::sync::OnceLock;

use locavqg_core::text::{collapse_whitespace, nfc};
use locavqg_core::{Question, QuestionSource};
use regex::Regex;

use crate::error::PromptError;

fn enumerator() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?m)^[ \t]*\d{1,3}[.)][ \t]*").expect("valid regex"))
}

/// Splits a numbered-list response ("1. …", "2) …") into questions.
///
/// Text before the first enumerator is ignored; continuation lines belong to
/// the preceding item. Items are whitespace-collapsed and NFC-normalized,
/// never completed or invented. `expected` is only used for a log warning.
pub fn parse_questions(
    raw: &str,
    expected: usize,
    task_id: &str,
) -> Result<Vec<Question>, PromptError> {
    let starts: Vec<(usize, usize)> = enumerator()
        .find_iter(raw)
        .map(|m| (m.start(), m.end()))
        .collect();
    let mut out = Vec::with_capacity(starts.len());
    for (i, &(_, body_start)) in starts.iter().enumerate() {
        let body_end = starts.get(i + 1).map_or(raw.len(), |&(s, _)| s);
        let text = nfc(&collapse_whitespace(&raw[body_start..body_end]));
        if !text.is_empty() {
            out.push(Question::new(text, QuestionSource::Llm, task_id));
        }
    }
    if out.is_empty() {
        return Err(PromptError::Unparseable {
            raw: raw.to_string(),
        });
    }
    if out.len() != expected {
        log::warn!(
            "task {task_id}: expected {expected} questions, parsed {}",
            out.len()
        );
    }
    Ok(out)
}
