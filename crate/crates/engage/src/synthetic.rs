//! Templated question banks for separability tests and offline demos.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SUBJECTS: &[&str] = &[
    "the old brick church",
    "that tall glass tower",
    "the little corner bakery",
    "the stone bridge",
    "the riverside park",
    "the public library",
    "the red lighthouse",
    "the covered market",
    "the train station",
    "the art museum",
    "the city hall",
    "the harbor",
    "the theater on the corner",
    "the community garden",
    "the university campus",
    "the fire station",
];

const EVENTS: &[&str] = &[
    "festivals",
    "concerts",
    "parades",
    "farmers markets",
    "street fairs",
    "art shows",
    "food tastings",
    "night markets",
];

const ENTITIES: &[&str] = &[
    "treaty",
    "document",
    "charter",
    "agreement",
    "law",
    "company",
    "dynasty",
    "republic",
];

const POSITIVE: &[&str] = &[
    "Can you guess what {s} was used for a hundred years ago?",
    "Can you guess why people gather around {s} in the evening?",
    "What types of events or {e} might take place near {s} throughout the year?",
    "What do you imagine it would feel like to spend a whole day at {s}?",
    "If you could redesign {s}, what would you change and why?",
    "How do you think {s} shapes the daily life of people living nearby?",
    "Have you ever wondered what stories {s} could tell us?",
    "What kind of {e} would you love to see happening around {s}?",
];

const NEGATIVE: &[&str] = &[
    "In what year was {s} built?",
    "In what year did the {n} come into force?",
    "What {n} was signed in {y}?",
    "Who founded the {n} in {y}?",
    "How many floors does {s} have?",
    "What is the official height of {s} in meters?",
    "Which architect designed {s}?",
    "In what year was the {n} of {y} dissolved?",
];

/// Returns `(negatives, positives)`, `n` of each, drawn from the template banks.
pub fn template_questions(n: usize, seed: u64) -> (Vec<String>, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fill = |bank: &[&str], rng: &mut ChaCha8Rng| -> String {
        let t = bank.choose(rng).expect("bank");
        let year = rand::Rng::gen_range(rng, 1200..2020).to_string();
        t.replace("{s}", SUBJECTS.choose(rng).expect("subjects"))
            .replace("{e}", EVENTS.choose(rng).expect("events"))
            .replace("{n}", ENTITIES.choose(rng).expect("entities"))
            .replace("{y}", &year)
    };
    let neg = (0..n).map(|_| fill(NEGATIVE, &mut rng)).collect();
    let pos = (0..n).map(|_| fill(POSITIVE, &mut rng)).collect();
    (neg, pos)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn banks_are_deterministic_and_sized() {
        let (n1, p1) = template_questions(25, 9);
        let (n2, p2) = template_questions(25, 9);
        assert_eq!((n1.len(), p1.len()), (25, 25));
        assert_eq!(n1, n2);
        assert_eq!(p1, p2);
        assert!(n1.iter().chain(&p1).all(|q| !q.contains('{')));
    }
}
