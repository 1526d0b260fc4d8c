//! Brute-force n-gram oracles over whitespace-separated lowercase words.
#![allow(dead_code)]

fn count(hay: &[&str], gram: &[&str]) -> usize {
    if hay.len() < gram.len() {
        return 0;
    }
    (0..=hay.len() - gram.len()).filter(|&i| &hay[i..i + gram.len()] == gram).count()
}

/// Clipped matches and candidate n-gram total for one order.
fn clipped(cand: &[&str], refs: &[Vec<&str>], n: usize) -> (usize, usize) {
    if cand.len() < n {
        return (0, 0);
    }
    let total = cand.len() - n + 1;
    let mut matched = 0;
    for i in 0..total {
        let g = &cand[i..i + n];
        // only the first occurrence of each distinct gram contributes
        if (0..i).any(|j| &cand[j..j + n] == g) {
            continue;
        }
        let c = count(cand, g);
        let r = refs.iter().map(|r| count(r, g)).max().unwrap_or(0);
        matched += c.min(r);
    }
    (matched, total)
}

pub fn bleu(cand: &str, refs: &[&str]) -> f64 {
    let c: Vec<&str> = cand.split_whitespace().collect();
    let rs: Vec<Vec<&str>> = refs.iter().map(|r| r.split_whitespace().collect()).collect();
    if c.is_empty() {
        return 0.0;
    }
    let (m1, t1) = clipped(&c, &rs, 1);
    if m1 == 0 {
        return 0.0;
    }
    let mut prod = m1 as f64 / t1 as f64;
    for n in 2..=4 {
        let (m, t) = clipped(&c, &rs, n);
        prod *= (m as f64 + 1.0) / (t as f64 + 1.0);
    }
    let mut best = usize::MAX;
    let mut r_len = 0;
    for r in &rs {
        let d = r.len().abs_diff(c.len());
        if d < best || (d == best && r.len() < r_len) {
            best = d;
            r_len = r.len();
        }
    }
    let bp = if c.len() > r_len { 1.0 } else { (1.0 - r_len as f64 / c.len() as f64).exp() };
    bp * prod.powf(0.25)
}

pub fn rouge2(cand: &str, refs: &[&str]) -> f64 {
    let c: Vec<&str> = cand.split_whitespace().collect();
    let mut best = 0.0f64;
    for r in refs {
        let r: Vec<&str> = r.split_whitespace().collect();
        if c.len() < 2 || r.len() < 2 {
            continue;
        }
        let (m, tc) = clipped(&c, std::slice::from_ref(&r), 2);
        if m == 0 {
            continue;
        }
        let p = m as f64 / tc as f64;
        let rec = m as f64 / (r.len() - 1) as f64;
        best = best.max(2.0 * p * rec / (p + rec));
    }
    best
}

const WORDS: [&str; 8] = ["the", "park", "river", "old", "bridge", "what", "near", "you"];

/// Random sentence over a small vocabulary so n-grams repeat often.
pub fn sentence(rng: &mut impl rand::Rng) -> String {
    let n = rng.gen_range(1..=12);
    (0..n).map(|_| WORDS[rng.gen_range(0..WORDS.len())]).collect::<Vec<_>>().join(" ")
}
