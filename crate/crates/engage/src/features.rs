use locavqg_core::text::{collapse_whitespace, nfc, tokenize};

/// Normalization applied to every question before featurization.
pub fn normalize(text: &str) -> String {
    collapse_whitespace(&nfc(text))
}

// FNV-1a: stable across platforms and compiler versions, so hashed feature
// ids stay valid in saved checkpoints.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Hashed unigram and bigram ids of the first `max_tokens` tokens.
///
/// Bigrams include sentence-boundary markers so the opening word pair,
/// which carries most of the question type, gets its own feature.
pub fn hashed_ngrams(text: &str, buckets: usize, max_tokens: usize) -> Vec<usize> {
    let mut toks = tokenize(&normalize(text));
    toks.truncate(max_tokens);
    let mut ids = Vec::with_capacity(toks.len() * 2 + 1);
    for t in &toks {
        ids.push(fnv1a(format!("u:{t}").as_bytes()));
    }
    let bounded: Vec<&str> = std::iter::once("<s>")
        .chain(toks.iter().map(String::as_str))
        .chain(std::iter::once("</s>"))
        .collect();
    for w in bounded.windows(2) {
        ids.push(fnv1a(format!("b:{} {}", w[0], w[1]).as_bytes()));
    }
    ids.into_iter().map(|h| (h % buckets as u64) as usize).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_vectors() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn trailing_whitespace_is_ignored() {
        assert_eq!(
            hashed_ngrams("Can you guess?", 1 << 12, 64),
            hashed_ngrams("Can you guess?  \n", 1 << 12, 64)
        );
    }

    #[test]
    fn counts_and_truncation() {
        // 3 tokens: 3 unigrams + 4 bigrams
        assert_eq!(hashed_ngrams("a b c", 97, 64).len(), 7);
        assert_eq!(hashed_ngrams("a b c", 97, 2).len(), 5);
        assert_eq!(hashed_ngrams("", 97, 64).len(), 1);
        assert!(hashed_ngrams("x y z", 97, 64).iter().all(|&i| i < 97));
    }
}
