use std::path::Path;

use locavqg_core::text::{SENTENCE_POLICY, TOKENIZER_POLICY};
use locavqg_metrics::{
    abstract_term_ratio, builtin_abstract_terms, builtin_stopwords, corpus_stats, frequent_words, pairwise_cosine,
    question_types, term_depth, yngve, Corpus, Hierarchy, HashedEncoder, Lexicon, MetricReport, MetricValue,
    ParseFile, SentenceEncoder, NOUN_POLICY,
};
use serde_json::json;

use super::{load_dataset, out, require};
use crate::app::{Outcome, Status};
use crate::config::{Backend, PipelineConfig};
use crate::error::Result;

fn lexicon(path: &Option<std::path::PathBuf>, builtin: fn() -> Lexicon) -> Result<(Lexicon, String)> {
    match path {
        Some(p) => Ok((Lexicon::load(p)?, p.display().to_string())),
        None => Ok((builtin(), "builtin".into())),
    }
}

/// Every corpus statistic for `corpus`. `records` and city counts are
/// included when the corpus came from a dataset file.
pub fn corpus_report(cfg: &PipelineConfig, corpus: &Corpus, records: Option<(usize, serde_json::Value)>) -> Result<MetricReport> {
    let pol = json!({"tokenizer": TOKENIZER_POLICY, "sentences": SENTENCE_POLICY});
    let mut r = MetricReport::default();
    if let Some((n, cities)) = records {
        r.set("records", n as f64, json!({"cities": cities}))?;
    }
    r.set("questions", corpus.len() as f64, json!({}))?;
    let s = corpus_stats(corpus)?;
    r.set("vocab", s.vocab as f64, pol.clone())?;
    r.set("avg_sentence_len", s.avg_sentence_len, pol.clone())?;
    r.set("avg_question_len", s.avg_question_len, pol.clone())?;

    let types = question_types(corpus);
    let top: Vec<_> = types.counts.iter().take(cfg.stats.top_types).collect();
    r.set("question_types", types.distinct as f64, json!({"tokenizer": TOKENIZER_POLICY, "top": top}))?;

    let (stop, stop_src) = lexicon(&cfg.paths.stopwords, builtin_stopwords)?;
    let words = frequent_words(corpus, &stop, cfg.stats.top_words);
    r.set("frequent_words", words.len() as f64, json!({"stoplist": stop_src, "top": words}))?;

    let (abs, abs_src) = lexicon(&cfg.paths.abstract_lexicon, builtin_abstract_terms)?;
    r.set("abstract_term_ratio", abstract_term_ratio(corpus, &abs), json!({"lexicon": abs_src, "tokenizer": TOKENIZER_POLICY}))?;

    match &cfg.paths.hierarchy {
        Some(h) => {
            require(h, "noun hierarchy", "stats (supply paths.hierarchy)")?;
            let depth = term_depth(corpus, &Hierarchy::load(h)?)?;
            r.set("term_depth", depth, json!({"hierarchy": h, "nouns": NOUN_POLICY}))?;
        }
        None => r.insert("term_depth", MetricValue::Unavailable("no hierarchy configured".into()), json!({}))?,
    }

    match &cfg.paths.parses {
        Some(p) => {
            require(p, "parse file", "stats (supply paths.parses)")?;
            let parser = ParseFile::load(p)?;
            let sentences: Vec<String> = corpus
                .questions
                .iter()
                .flat_map(|q| locavqg_core::text::split_sentences(q))
                .collect();
            let y = yngve(&sentences, &parser);
            let cfgv = json!({"parser": y.parser, "scored": y.scored, "skipped": y.skipped, "sentences": SENTENCE_POLICY});
            match y.mean {
                Some(m) => r.set("yngve", m, cfgv)?,
                None => r.insert("yngve", MetricValue::Unavailable("no sentence parsed".into()), cfgv)?,
            }
        }
        None => r.insert("yngve", MetricValue::Unavailable("no constituency parses configured".into()), json!({}))?,
    }

    let enc = HashedEncoder::default();
    let encoder: Option<&dyn SentenceEncoder> = match cfg.backends.encoder {
        Backend::Stub => Some(&enc),
        Backend::Real => None,
    };
    if corpus.len() >= 2 {
        let v = pairwise_cosine(corpus, encoder, cfg.stats.cosine_sample.max(2), cfg.seed)?;
        let id = encoder.map_or_else(|| "none".to_string(), |e| e.id());
        r.insert("pairwise_cosine", v, json!({"encoder": id, "sample": cfg.stats.cosine_sample, "seed": cfg.seed}))?;
    }
    Ok(r)
}

pub fn cmd_stats(cfg: &PipelineConfig, dataset: Option<&Path>, questions: Option<&Path>, output: Option<&Path>) -> Result<Outcome> {
    let (corpus, records) = match questions {
        Some(q) => {
            require(q, "question list", "stats (supply --questions)")?;
            (Corpus::load(q)?, None)
        }
        None => {
            let path = dataset.map(Path::to_path_buf).unwrap_or_else(|| cfg.paths.dataset());
            let d = load_dataset(&path)?;
            let qs = d.records.iter().flat_map(|r| r.questions.iter().map(|q| q.text.clone()));
            (Corpus::new(qs), Some((d.records.len(), json!(d.city_counts()))))
        }
    };
    let report = corpus_report(cfg, &corpus, records)?;
    let path = out(cfg, output, "stats_report.json");
    report.save(&path)?;
    Ok(Outcome::new(Status::Success, vec![path]))
}
