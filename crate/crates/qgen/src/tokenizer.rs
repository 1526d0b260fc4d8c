use std::collections::{BTreeMap, HashMap};

use locavqg_core::text::{nfc, split_tokens};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const PAD: usize = 0;
pub const BOS: usize = 1;
pub const EOS: usize = 2;
pub const UNK: usize = 3;
const SPECIALS: [&str; 4] = ["<pad>", "<bos>", "<eos>", "<unk>"];

/// Case-preserving word-level tokenizer over the `basic-v1` token split.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "TokenizerFile", into = "TokenizerFile")]
pub struct WordTokenizer {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct TokenizerFile {
    kind: String,
    vocab: Vec<String>,
}

impl From<TokenizerFile> for WordTokenizer {
    fn from(f: TokenizerFile) -> Self {
        Self::from_vocab(f.vocab)
    }
}

impl From<WordTokenizer> for TokenizerFile {
    fn from(t: WordTokenizer) -> Self {
        TokenizerFile {
            kind: "word-v1".into(),
            vocab: t.vocab,
        }
    }
}

impl PartialEq for WordTokenizer {
    fn eq(&self, other: &Self) -> bool {
        self.vocab == other.vocab
    }
}

impl WordTokenizer {
    /// Builds a vocabulary from `texts`, keeping tokens seen at least
    /// `min_count` times, most frequent first (ties broken lexically), capped
    /// at `max_vocab` entries including the four specials.
    pub fn build<'a>(texts: impl IntoIterator<Item = &'a str>, min_count: usize, max_vocab: usize) -> Self {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for t in texts {
            for tok in split_tokens(&nfc(t)) {
                *counts.entry(tok).or_default() += 1;
            }
        }
        let mut ranked: Vec<(String, usize)> = counts
            .into_iter()
            .filter(|(t, c)| *c >= min_count.max(1) && !SPECIALS.contains(&t.as_str()))
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let vocab = SPECIALS
            .iter()
            .map(|s| s.to_string())
            .chain(ranked.into_iter().map(|(t, _)| t))
            .take(max_vocab.max(SPECIALS.len()))
            .collect();
        Self::from_vocab(vocab)
    }

    fn from_vocab(vocab: Vec<String>) -> Self {
        let index = vocab.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self { vocab, index }
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    /// `word-v1-` followed by a content hash of the vocabulary.
    pub fn id(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.vocab {
            h.update(t.as_bytes());
            h.update([0u8]);
        }
        format!("word-v1-{}", &hex::encode(h.finalize())[..16])
    }

    pub fn token(&self, id: usize) -> &str {
        self.vocab.get(id).map(String::as_str).unwrap_or("<unk>")
    }

    /// Token ids without specials.
    pub fn encode(&self, text: &str) -> Vec<usize> {
        split_tokens(&nfc(text))
            .into_iter()
            .map(|t| self.index.get(&t).copied().unwrap_or(UNK))
            .collect()
    }

    /// Joins tokens, stopping at `<eos>` and dropping other specials.
    pub fn decode(&self, ids: &[usize]) -> String {
        let mut out = String::new();
        for &id in ids {
            if id == EOS {
                break;
            }
            if id == PAD || id == BOS {
                continue;
            }
            let tok = self.token(id);
            let attach = tok.chars().count() == 1
                && matches!(tok, "." | "," | "?" | "!" | ";" | ":" | ")" | "%");
            if !out.is_empty() && !attach && !out.ends_with('(') {
                out.push(' ');
            }
            out.push_str(tok);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specials_come_first_and_frequency_orders_the_rest() {
        let t = WordTokenizer::build(["b a a", "c a b"], 1, 100);
        assert_eq!(t.token(PAD), "<pad>");
        assert_eq!(t.token(EOS), "<eos>");
        assert_eq!(t.token(4), "a");
        assert_eq!(t.token(5), "b");
        assert_eq!(t.token(6), "c");
    }

    #[test]
    fn round_trip_and_unknowns() {
        let t = WordTokenizer::build(["Can you guess what this is?"], 1, 100);
        let ids = t.encode("Can you guess what this is?");
        assert_eq!(t.decode(&ids), "Can you guess what this is?");
        assert_eq!(t.encode("zebra"), vec![UNK]);
        let mut with_eos = ids.clone();
        with_eos.push(EOS);
        with_eos.push(ids[0]);
        assert_eq!(t.decode(&with_eos), "Can you guess what this is?");
    }

    #[test]
    fn cap_and_min_count() {
        let t = WordTokenizer::build(["a a b"], 2, 100);
        assert_eq!(t.len(), 5);
        let t = WordTokenizer::build(["a b c d e"], 1, 6);
        assert_eq!(t.len(), 6);
    }

    #[test]
    fn id_depends_on_vocab_and_survives_serde() {
        let a = WordTokenizer::build(["x y"], 1, 100);
        let b = WordTokenizer::build(["x z"], 1, 100);
        assert_ne!(a.id(), b.id());
        assert!(a.id().starts_with("word-v1-"));
        let json = serde_json::to_string(&a).unwrap();
        let back: WordTokenizer = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.id(), a.id());
    }
}
