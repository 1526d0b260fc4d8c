mod support;

use std::process::Command as Proc;

use locavqg_cli::commands::infer::Prediction;
use locavqg_cli::commands::read_jsonl;
use locavqg_cli::{execute, CliError, Command, RunManifest, Status};
use locavqg_core::Dataset;
use locavqg_metrics::{MetricReport, MetricValue};
use support::Workspace;

fn gen(ws: &Workspace, cfg: &locavqg_cli::PipelineConfig) -> Vec<u8> {
    let o = execute(cfg, &Command::GenDataset { no_filter: false }).unwrap();
    assert_eq!(o.status, Status::Success);
    std::fs::read(ws.out().join("dataset.jsonl")).unwrap()
}

#[test]
fn gen_dataset_is_filtered_and_reproducible() {
    let ws = Workspace::new(5);
    let cfg = ws.config();
    let first = gen(&ws, &cfg);
    let report1 = std::fs::read(ws.out().join("generation_report.json")).unwrap();
    let d = Dataset::read(&ws.out().join("dataset.jsonl")).unwrap();
    assert_eq!(d.records.len(), 5);
    for r in &d.records {
        for q in &r.questions {
            assert!(q.engaging_score.unwrap() >= cfg.classifier.threshold);
        }
        assert!(r.rejected.iter().all(|q| q.engaging_score.unwrap() < cfg.classifier.threshold));
    }
    assert_eq!(gen(&ws, &cfg), first);
    assert_eq!(std::fs::read(ws.out().join("generation_report.json")).unwrap(), report1);
    let m = RunManifest::load(&ws.out().join("runs/gen-dataset.json")).unwrap();
    assert_eq!(m.config, cfg);
    assert_eq!(m.status, "success");
}

#[test]
fn unfiltered_keeps_everything() {
    let ws = Workspace::new(3);
    let mut cfg = ws.config();
    cfg.ablation.filter_dataset = false;
    execute(&cfg, &Command::GenDataset { no_filter: false }).unwrap();
    let d = Dataset::read(&ws.out().join("dataset.jsonl")).unwrap();
    assert_eq!(d.header.threshold, None);
    for r in &d.records {
        assert!(r.rejected.is_empty());
        assert_eq!(r.questions.len(), cfg.llm.max_questions);
    }
}

#[test]
fn missing_image_gives_partial_status() {
    let ws = Workspace::new(4);
    std::fs::remove_file(ws.path().join("images/t002_s.jpg")).unwrap();
    let o = execute(&ws.config(), &Command::GenDataset { no_filter: false }).unwrap();
    assert_eq!(o.status, Status::Partial);
    assert_eq!(Dataset::read(&ws.out().join("dataset.jsonl")).unwrap().records.len(), 3);
}

#[test]
fn missing_artifacts_name_their_producer() {
    let ws = Workspace::new(2);
    let cfg = ws.config();
    let cases = [
        (Command::Train { tier: None, fractions: vec![], name: None }, "gen-dataset"),
        (Command::Distill { teacher: None, student_tier: None, name: None }, "train"),
        (Command::Infer { checkpoint: None, filtered: false, unfiltered: false, output: None }, "distill"),
        (Command::Eval { predictions: None, output: None }, "infer"),
    ];
    for (cmd, producer) in cases {
        match execute(&cfg, &cmd) {
            Err(e @ CliError::MissingArtifact { .. }) => {
                assert!(e.to_string().contains(&format!("locavqg {producer}")), "{e}");
                assert_eq!(e.exit_code(), 3);
            }
            other => panic!("{}: expected a missing artifact, got {other:?}", cmd.name()),
        }
    }
}

#[test]
fn full_stub_pipeline() {
    let ws = Workspace::new(6);
    let mut cfg = ws.config();
    cfg.backends.scorer = locavqg_cli::config::ScorerKind::Classifier;
    execute(&cfg, &Command::TrainClassifier).unwrap();
    gen(&ws, &cfg);

    let o = execute(&cfg, &Command::Train { tier: None, fractions: vec![0.5, 1.0], name: None }).unwrap();
    assert_eq!(o.outputs.len(), 2);
    let teacher = ws.out().join("checkpoints/tiny-f1.00");
    assert!(teacher.join("model.json").exists());
    assert!(ws.out().join("checkpoints/tiny-f0.50/model.json").exists());

    execute(&cfg, &Command::Distill { teacher: Some(teacher), student_tier: None, name: None }).unwrap();
    assert!(ws.out().join("checkpoints/distilled-tiny/model.json").exists());

    let run = |filtered: bool, file: &str| -> Vec<Prediction> {
        execute(
            &cfg,
            &Command::Infer {
                checkpoint: None,
                filtered,
                unfiltered: !filtered,
                output: Some(ws.out().join(file)),
            },
        )
        .unwrap();
        read_jsonl(&ws.out().join(file)).unwrap()
    };
    let plain = run(false, "plain.jsonl");
    let filtered = run(true, "predictions.jsonl");
    assert_eq!(plain.len(), filtered.len());
    for (p, f) in plain.iter().zip(&filtered) {
        assert_eq!(p.task_id, f.task_id);
        assert!(f.engaging_score >= p.engaging_score || f.fallback, "{p:?} vs {f:?}");
    }

    execute(&cfg, &Command::Eval { predictions: None, output: None }).unwrap();
    let r = MetricReport::load(&ws.out().join("eval_report.json")).unwrap();
    for k in ["bleu4", "rouge2", "bertscore"] {
        let v = r.get(k).unwrap().value().unwrap();
        assert!((0.0..=1.0 + 1e-9).contains(&v), "{k} = {v}");
    }
    assert!(matches!(r.get("bleurt"), Some(MetricValue::Unavailable(_))));

    execute(&cfg, &Command::Stats { dataset: None, questions: None, output: None }).unwrap();
    let s = MetricReport::load(&ws.out().join("stats_report.json")).unwrap();
    assert_eq!(s.get("records").unwrap().value(), Some(6.0));
    assert!(s.get("vocab").unwrap().value().unwrap() > 0.0);
    assert!(matches!(s.get("yngve"), Some(MetricValue::Unavailable(_))));

    let ck = ws.out().join("checkpoints/distilled-tiny");
    execute(
        &cfg,
        &Command::Bench { model: ck.display().to_string(), trials: Some(3), filtered: true, output: None },
    )
    .unwrap();
    let b: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(ws.out().join("latency_report.json")).unwrap()).unwrap();
    assert!(b["attempts_per_task"].as_f64().unwrap() >= 1.0);
    assert!(b["load_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_locavqg");
    let ws = Workspace::new(2);
    let base = |args: &[&str]| {
        Proc::new(bin)
            .args(args)
            .arg("--set")
            .arg(format!("paths.manifest=\"{}\"", ws.path().join("manifest.csv").display()))
            .arg("--set")
            .arg(format!("paths.image_dir=\"{}\"", ws.path().join("images").display()))
            .arg("--out-dir")
            .arg(ws.out())
            .env("RUST_LOG", "error")
            .status()
            .unwrap()
            .code()
    };
    assert_eq!(base(&["no-such-command"]), Some(1));
    assert_eq!(base(&["gen-dataset", "--set", "ablation.dataset_fraction=1.5"]), Some(1));
    assert_eq!(base(&["eval"]), Some(3));
    assert_eq!(base(&["gen-dataset"]), Some(0));
    assert!(ws.out().join("dataset.jsonl").exists());
    let replay = ws.out().join("runs/gen-dataset.json");
    let before = std::fs::read(ws.out().join("dataset.jsonl")).unwrap();
    let status = Proc::new(bin)
        .args(["gen-dataset", "--replay"])
        .arg(&replay)
        .env("RUST_LOG", "error")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(std::fs::read(ws.out().join("dataset.jsonl")).unwrap(), before);
    std::fs::remove_file(ws.path().join("images/t001_n.jpg")).unwrap();
    assert_eq!(base(&["gen-dataset"]), Some(2));
}
