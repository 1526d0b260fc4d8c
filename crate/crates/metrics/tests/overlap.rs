mod oracle;

use locavqg_metrics::{bleu4, corpus_bleu4, rouge2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn twenty_pairs_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let c = oracle::sentence(&mut rng);
        let r1 = oracle::sentence(&mut rng);
        let r2 = oracle::sentence(&mut rng);
        let refs = [r1.as_str(), r2.as_str()];
        assert!((bleu4(&c, &refs).unwrap() - oracle::bleu(&c, &refs)).abs() < 1e-9, "{c} | {refs:?}");
        assert!((rouge2(&c, &refs).unwrap() - oracle::rouge2(&c, &refs)).abs() < 1e-9, "{c} | {refs:?}");
    }
}

#[test]
fn corpus_bleu_pools_counts() {
    // 1 of 2 unigrams match in the first pair, 2 of 2 in the second
    let pairs = vec![("a x", vec!["a b"]), ("c d", vec!["c d"])];
    let p: f64 = 3.0 / 4.0 * (1.0 + 1.0) / (2.0 + 1.0) * 1.0 * 1.0;
    assert!((corpus_bleu4(&pairs).unwrap() - p.powf(0.25)).abs() < 1e-12);
}

fn words() -> impl Strategy<Value = String> {
    proptest::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e"]), 0..10).prop_map(|v| v.join(" "))
}

proptest! {
    #[test]
    fn bounded_and_reference_order_invariant(c in words(), refs in proptest::collection::vec(words(), 1..4)) {
        let fwd: Vec<&str> = refs.iter().map(String::as_str).collect();
        let rev: Vec<&str> = fwd.iter().rev().copied().collect();
        for f in [bleu4, rouge2] {
            let a = f(&c, &fwd).unwrap();
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert_eq!(a, f(&c, &rev).unwrap());
        }
    }

    #[test]
    fn agrees_with_oracle(c in words(), r in words()) {
        prop_assert!((bleu4(&c, &[&r]).unwrap() - oracle::bleu(&c, &[&r])).abs() < 1e-9);
        prop_assert!((rouge2(&c, &[&r]).unwrap() - oracle::rouge2(&c, &[&r])).abs() < 1e-9);
    }
}
