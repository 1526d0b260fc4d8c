//! Synthetic token-level tasks for desk-scale training experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::train::EncodedExample;

/// Copy task: the target repeats the source. Symbols are ids
/// `4..vocab` (ids below 4 are the tokenizer specials).
pub fn copy_task(n: usize, vocab: usize, min_len: usize, max_len: usize, seed: u64) -> Vec<EncodedExample> {
    assert!(vocab > 4 && min_len >= 1 && max_len >= min_len);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let len = rng.gen_range(min_len..=max_len);
            let seq: Vec<usize> = (0..len).map(|_| rng.gen_range(4..vocab)).collect();
            EncodedExample::new(seq.clone(), &seq, max_len, max_len)
        })
        .collect()
}

/// Copy task whose targets have each symbol replaced by a uniformly random
/// symbol with probability `noise`.
pub fn noisy_copy_task(
    n: usize,
    vocab: usize,
    min_len: usize,
    max_len: usize,
    noise: f64,
    seed: u64,
) -> Vec<EncodedExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e6f_6973_65);
    copy_task(n, vocab, min_len, max_len, seed)
        .into_iter()
        .map(|mut e| {
            let eos = e.labels.len() - 1;
            for i in 0..eos {
                if rng.gen_bool(noise) {
                    let t = rng.gen_range(4..vocab);
                    e.labels[i] = t;
                    e.dec_in[i + 1] = t;
                }
            }
            e
        })
        .collect()
}
