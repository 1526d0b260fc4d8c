use std::collections::HashMap;

use locavqg_core::text::tokenize;

use crate::error::{MetricsError, Result};

/// Counts of every contiguous `n`-token window.
pub fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut out = HashMap::new();
    if n == 0 || tokens.len() < n {
        return out;
    }
    for w in tokens.windows(n) {
        *out.entry(w).or_insert(0) += 1;
    }
    out
}

/// Per-order clipped matches and candidate totals for orders 1..=4.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BleuStats {
    pub matches: [usize; 4],
    pub totals: [usize; 4],
    pub cand_len: usize,
    pub ref_len: usize,
}

impl BleuStats {
    fn add(&mut self, o: &BleuStats) {
        for i in 0..4 {
            self.matches[i] += o.matches[i];
            self.totals[i] += o.totals[i];
        }
        self.cand_len += o.cand_len;
        self.ref_len += o.ref_len;
    }

    /// Geometric mean of the precisions times the brevity penalty. Orders
    /// 2-4 use add-one smoothing; an empty candidate or zero unigram
    /// precision scores 0.
    pub fn score(&self) -> f64 {
        if self.cand_len == 0 || self.matches[0] == 0 {
            return 0.0;
        }
        let mut log_sum = (self.matches[0] as f64 / self.totals[0] as f64).ln();
        for n in 1..4 {
            let p = (self.matches[n] as f64 + 1.0) / (self.totals[n] as f64 + 1.0);
            log_sum += p.ln();
        }
        let bp = if self.cand_len > self.ref_len {
            1.0
        } else {
            (1.0 - self.ref_len as f64 / self.cand_len as f64).exp()
        };
        bp * (log_sum / 4.0).exp()
    }
}

/// Reference length closest to `c`; ties go to the shorter reference.
fn closest_ref_len(c: usize, refs: &[Vec<String>]) -> usize {
    refs.iter()
        .map(|r| r.len())
        .min_by_key(|&r| (r.abs_diff(c), r))
        .unwrap_or(0)
}

pub fn bleu_stats(candidate: &str, references: &[&str]) -> Result<BleuStats> {
    if references.is_empty() {
        return Err(MetricsError::NoReferences);
    }
    let cand = tokenize(candidate);
    let refs: Vec<Vec<String>> = references.iter().map(|r| tokenize(r)).collect();
    let mut st = BleuStats {
        cand_len: cand.len(),
        ref_len: closest_ref_len(cand.len(), &refs),
        ..BleuStats::default()
    };
    for n in 1..=4 {
        let cc = ngram_counts(&cand, n);
        let ref_counts: Vec<_> = refs.iter().map(|r| ngram_counts(r, n)).collect();
        let mut m = 0;
        for (g, &c) in &cc {
            let max_ref = ref_counts.iter().map(|rc| rc.get(g).copied().unwrap_or(0)).max().unwrap_or(0);
            m += c.min(max_ref);
        }
        st.matches[n - 1] = m;
        st.totals[n - 1] = cand.len().saturating_sub(n - 1);
    }
    Ok(st)
}

/// Sentence-level BLEU-4 over `basic-v1` tokens.
pub fn bleu4(candidate: &str, references: &[&str]) -> Result<f64> {
    Ok(bleu_stats(candidate, references)?.score())
}

/// Corpus-level BLEU-4: statistics are summed before the precisions are formed.
pub fn corpus_bleu4(pairs: &[(&str, Vec<&str>)]) -> Result<f64> {
    let mut total = BleuStats::default();
    for (c, refs) in pairs {
        total.add(&bleu_stats(c, refs)?);
    }
    Ok(total.score())
}

/// ROUGE-2 F1 on bigrams, maximised over references.
pub fn rouge2(candidate: &str, references: &[&str]) -> Result<f64> {
    if references.is_empty() {
        return Err(MetricsError::NoReferences);
    }
    let cand = tokenize(candidate);
    let cc = ngram_counts(&cand, 2);
    let c_total = cand.len().saturating_sub(1);
    if c_total == 0 {
        return Ok(0.0);
    }
    let mut best: f64 = 0.0;
    for r in references {
        let rt = tokenize(r);
        let r_total = rt.len().saturating_sub(1);
        if r_total == 0 {
            continue;
        }
        let rc = ngram_counts(&rt, 2);
        let overlap: usize = cc.iter().map(|(g, &c)| c.min(rc.get(g).copied().unwrap_or(0))).sum();
        if overlap == 0 {
            continue;
        }
        let p = overlap as f64 / c_total as f64;
        let rec = overlap as f64 / r_total as f64;
        best = best.max(2.0 * p * rec / (p + rec));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_disjoint() {
        let s = "What might happen in this park at night?";
        assert!((bleu4(s, &[s]).unwrap() - 1.0).abs() < 1e-12);
        assert!((rouge2(s, &[s]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(bleu4("alpha beta gamma", &["delta epsilon"]).unwrap(), 0.0);
        assert_eq!(rouge2("alpha beta gamma", &["delta epsilon zeta"]).unwrap(), 0.0);
    }

    #[test]
    fn short_identity_is_one() {
        assert!((bleu4("hello", &["hello"]).unwrap() - 1.0).abs() < 1e-12);
        assert!((bleu4("hello there", &["Hello there"]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(bleu4("", &["a b"]).unwrap(), 0.0);
        assert_eq!(rouge2("word", &["word"]).unwrap(), 0.0);
        assert!(matches!(bleu4("a", &[]), Err(MetricsError::NoReferences)));
        assert!(matches!(rouge2("a", &[]), Err(MetricsError::NoReferences)));
    }

    #[test]
    fn hand_computed_bleu() {
        // cand "the cat sat" vs ref "the cat sat down": p1 = 3/3,
        // p2 = (2+1)/(2+1), p3 = (1+1)/(1+1), p4 = (0+1)/(0+1); BP = exp(1 - 4/3)
        let b = bleu4("the cat sat", &["the cat sat down"]).unwrap();
        assert!((b - (1.0f64 - 4.0 / 3.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn hand_computed_rouge() {
        // bigrams: cand {a b, b c}, ref {a b, b d, d e}; overlap 1
        // P = 1/2, R = 1/3, F = 2/5
        assert!((rouge2("a b c", &["a b d e"]).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn corpus_bleu_of_identities_is_one() {
        let pairs = vec![("a b c d e", vec!["a b c d e"]), ("x y", vec!["x y"])];
        assert!((corpus_bleu4(&pairs).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closest_reference_ties_prefer_shorter() {
        let refs = vec![vec!["a".to_string(); 2], vec!["a".to_string(); 4]];
        assert_eq!(closest_ref_len(3, &refs), 2);
    }
}
