use locavqg_engage::{
    build_corpus, read_question_list, synthetic::template_questions, train_classifier, ClassifierModel32,
    ClassifierTrainConfig, Origin, SplitFractions,
};
use serde_json::json;

use super::write_json;
use crate::app::{Outcome, Status};
use crate::config::PipelineConfig;
use crate::error::Result;

/// Real corpora when both question lists are configured, otherwise the
/// synthetic template corpus.
pub fn cmd_train_classifier(cfg: &PipelineConfig) -> Result<Outcome> {
    let p = &cfg.paths;
    let corpus = match (&p.factoid_questions, &p.engaging_questions) {
        (Some(neg), Some(pos)) => {
            super::require(neg, "factoid question list", "train-classifier (supply paths.factoid_questions)")?;
            super::require(pos, "engaging question list", "train-classifier (supply paths.engaging_questions)")?;
            build_corpus(
                &read_question_list(neg)?,
                Origin::Squad,
                &read_question_list(pos)?,
                Origin::Mvqg,
                SplitFractions::default(),
                cfg.seed,
            )?
        }
        _ => {
            let (neg, pos) = template_questions(cfg.classifier.synthetic_size, cfg.seed);
            build_corpus(
                &neg,
                Origin::Synthetic,
                &pos,
                Origin::Synthetic,
                SplitFractions::default(),
                cfg.seed,
            )?
        }
    };
    let mut tc = ClassifierTrainConfig::for_backend(cfg.classifier.backend);
    tc.epochs = cfg.classifier.epochs;
    tc.batch_size = cfg.classifier.batch_size;
    tc.seed = cfg.seed;
    if let Some(lr) = cfg.classifier.lr {
        tc.lr = lr;
    }
    let (mut model, report): (ClassifierModel32, _) = train_classifier(&corpus, &tc)?;
    model.threshold = cfg.classifier.threshold;
    let dir = p.classifier();
    model.save(&dir)?;
    corpus.save(&dir.join("corpus.tsv"))?;
    let report_path = dir.join("train_report.json");
    write_json(&report_path, &json!({ "report": report, "threshold": model.threshold }))?;
    log::info!(
        "classifier test accuracy {:.4} ({})",
        report.accuracy.test,
        report.encoder_id
    );
    Ok(Outcome::new(Status::Success, vec![dir.join(locavqg_engage::CHECKPOINT_FILE), report_path]))
}
