//! Text normalization, tokenization ("basic-v1") and sentence splitting
//! ("sent-v1"). Every corpus statistic is labeled with these policy ids.

use unicode_normalization::UnicodeNormalization;

pub const TOKENIZER_POLICY: &str = "basic-v1";
pub const SENTENCE_POLICY: &str = "sent-v1";

/// NFC-normalizes `s`.
pub fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// Replaces every run of whitespace (including newlines) by one space and trims.
pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Splits into word and punctuation tokens, preserving case.
///
/// A word is a maximal run of alphanumeric characters, where an apostrophe
/// between two alphanumerics stays inside the word ("you'd"). Every other
/// non-whitespace character is its own token.
pub fn split_tokens(s: &str) -> Vec<String> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut word = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            word.push(c);
            continue;
        }
        let inner_apostrophe = is_apostrophe(c)
            && !word.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if inner_apostrophe {
            word.push(c);
            continue;
        }
        if !word.is_empty() {
            out.push(std::mem::take(&mut word));
        }
        if !c.is_whitespace() {
            out.push(c.to_string());
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

/// `basic-v1`: [`split_tokens`] followed by case folding.
pub fn tokenize(s: &str) -> Vec<String> {
    split_tokens(s).into_iter().map(|t| t.to_lowercase()).collect()
}

pub fn is_word_token(t: &str) -> bool {
    t.chars().any(char::is_alphanumeric)
}

/// `sent-v1`: split after a run of `.`, `?` or `!` that is followed by
/// whitespace or the end of the text.
pub fn split_sentences(s: &str) -> Vec<String> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        cur.push(c);
        if matches!(c, '.' | '?' | '!') {
            while i + 1 < chars.len() && matches!(chars[i + 1], '.' | '?' | '!') {
                i += 1;
                cur.push(chars[i]);
            }
            let at_boundary = i + 1 == chars.len() || chars[i + 1].is_whitespace();
            if at_boundary {
                let t = cur.trim();
                if !t.is_empty() {
                    out.push(t.to_string());
                }
                cur.clear();
            }
        }
        i += 1;
    }
    let t = cur.trim();
    if !t.is_empty() {
        out.push(t.to_string());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_splits_punctuation_and_folds_case() {
        assert_eq!(
            tokenize("Did you know, you'd see it?"),
            vec!["did", "you", "know", ",", "you'd", "see", "it", "?"]
        );
        assert_eq!(split_tokens("'quoted'"), vec!["'", "quoted", "'"]);
    }

    #[test]
    fn sentences_split_on_terminal_punctuation() {
        let s = "Pittsburgh has 446 bridges. Can you spot one?  Yes!";
        assert_eq!(
            split_sentences(s),
            vec!["Pittsburgh has 446 bridges.", "Can you spot one?", "Yes!"]
        );
        assert_eq!(split_sentences("Dr.Who is 3.5 m tall"), vec!["Dr.Who is 3.5 m tall"]);
        assert_eq!(split_sentences("What?! Really"), vec!["What?!", "Really"]);
        assert!(split_sentences("   ").is_empty());
    }

    #[test]
    fn nfc_composes() {
        assert_eq!(nfc("Cafe\u{301}"), "Caf\u{e9}");
    }

    #[test]
    fn whitespace_collapse_removes_newlines() {
        assert_eq!(collapse_whitespace(" a\nb \t c "), "a b c");
    }
}
