use locavqg_metrics::{
    corpus_stats, frequent_words, question_types, yngve, ConstituencyParser, Corpus, Lexicon, Tree, normalized_yngve,
};
use proptest::prelude::*;

fn questions() -> impl Strategy<Value = Vec<String>> {
    let word = prop::sample::select(vec!["Did", "you", "know", "what", "the", "park", "is", "near", "Can"]);
    let q = (proptest::collection::vec(word, 1..8), prop::sample::select(vec!["?", ".", "! Why?"]))
        .prop_map(|(w, p)| format!("{}{}", w.join(" "), p));
    proptest::collection::vec(q, 1..12)
}

proptest! {
    #[test]
    fn permutation_invariant(qs in questions(), seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut shuffled = qs.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let (a, b) = (Corpus::new(qs), Corpus::new(shuffled));
        prop_assert_eq!(corpus_stats(&a).unwrap(), corpus_stats(&b).unwrap());
        prop_assert_eq!(question_types(&a), question_types(&b));
        let stop = Lexicon::from_words(["the"]);
        prop_assert_eq!(frequent_words(&a, &stop, 5), frequent_words(&b, &stop, 5));
    }

    #[test]
    fn duplication_keeps_vocab_and_lengths(qs in questions()) {
        let doubled: Vec<String> = qs.iter().chain(qs.iter()).cloned().collect();
        let (a, b) = (corpus_stats(&Corpus::new(qs)).unwrap(), corpus_stats(&Corpus::new(doubled)).unwrap());
        prop_assert_eq!(a.vocab, b.vocab);
        prop_assert!((a.avg_question_len - b.avg_question_len).abs() < 1e-12);
        prop_assert!((a.avg_sentence_len - b.avg_sentence_len).abs() < 1e-12);
    }

    #[test]
    fn recomputation_is_bit_identical(qs in questions()) {
        let c = Corpus::new(qs);
        prop_assert_eq!(
            corpus_stats(&c).unwrap().avg_sentence_len.to_bits(),
            corpus_stats(&c).unwrap().avg_sentence_len.to_bits()
        );
    }
}

struct Right;

impl ConstituencyParser for Right {
    /// Right-branching parse over whitespace words.
    fn parse(&self, s: &str) -> Option<String> {
        let w: Vec<&str> = s.split_whitespace().collect();
        let mut t = format!("(X {})", w.last()?);
        for x in w.iter().rev().skip(1) {
            t = format!("(X (W {x}) {t})");
        }
        Some(t)
    }
    fn id(&self) -> String {
        "right".into()
    }
}

#[test]
fn right_branching_scores_by_hand() {
    // every non-final word sits one step left of its sibling: depth 1 each
    let r = yngve(&["a b c", "solo"], &Right);
    assert_eq!(r.scored, 2);
    assert_eq!(r.mean, Some((2.0 / 3.0 + 0.0) / 2.0));
    let t = Tree::parse(&Right.parse("a b c").unwrap()).unwrap();
    assert_eq!(normalized_yngve(&t), 2.0 / 3.0);
}
