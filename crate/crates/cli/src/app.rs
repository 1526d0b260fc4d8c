use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::commands;
use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::runlog::{now_unix, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "locavqg", version, about = "Location-aware engaging question generation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// TOML pipeline config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Take the config from an earlier run manifest.
    #[arg(long, global = true, conflicts_with = "config")]
    pub replay: Option<PathBuf>,
    /// Override a config key, e.g. `--set ablation.include_address=false`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Geocode and caption the manifest tasks.
    Ingest,
    /// Ingest, prompt the LLM and filter into a dataset file.
    GenDataset {
        /// Keep every parsed question.
        #[arg(long)]
        no_filter: bool,
    },
    /// Train the engagingness classifier.
    TrainClassifier,
    /// Fine-tune a generator on the dataset (one checkpoint per fraction).
    Train {
        #[arg(long)]
        tier: Option<locavqg_qgen::Tier>,
        /// Comma-separated dataset fractions, e.g. 0.2,0.4,0.6,0.8,1.0.
        #[arg(long, value_delimiter = ',')]
        fractions: Vec<f64>,
        /// Checkpoint name (single fraction only).
        #[arg(long)]
        name: Option<String>,
    },
    /// Distill a student from a trained teacher checkpoint.
    Distill {
        #[arg(long)]
        teacher: Option<PathBuf>,
        #[arg(long)]
        student_tier: Option<locavqg_qgen::Tier>,
        #[arg(long)]
        name: Option<String>,
    },
    /// Generate one question per dataset task.
    Infer {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Rejection-sample through the classifier.
        #[arg(long, overrides_with = "unfiltered")]
        filtered: bool,
        #[arg(long)]
        unfiltered: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Score predictions against the dataset questions.
    Eval {
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Corpus statistics of a dataset or a question list.
    Stats {
        /// Dataset file; defaults to the configured dataset.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Plain-text question list (one per line) instead of a dataset.
        #[arg(long, conflicts_with = "dataset")]
        questions: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Latency of load, inference and post-filtering.
    Bench {
        /// `stub` or a checkpoint directory.
        #[arg(long, default_value = "stub")]
        model: String,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        filtered: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::GenDataset { .. } => "gen-dataset",
            Command::TrainClassifier => "train-classifier",
            Command::Train { .. } => "train",
            Command::Distill { .. } => "distill",
            Command::Infer { .. } => "infer",
            Command::Eval { .. } => "eval",
            Command::Stats { .. } => "stats",
            Command::Bench { .. } => "bench",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Success,
    /// Some items failed; the report lists them.
    Partial,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::Partial => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub outputs: Vec<PathBuf>,
}

impl Outcome {
    pub fn new(status: Status, outputs: Vec<PathBuf>) -> Self {
        Self { status, outputs }
    }
}

/// Resolves the config from the global flags.
pub fn resolve_config(g: &GlobalArgs) -> Result<PipelineConfig> {
    let mut cfg = match &g.replay {
        Some(p) => {
            let mut c = RunManifest::load(p)?.config;
            let mut doc = toml::Table::try_from(&c).map_err(|e| CliError::Config(e.to_string()))?;
            for o in &g.overrides {
                crate::config::apply_override(&mut doc, o)?;
            }
            c = toml::Value::Table(doc)
                .try_into()
                .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
            c
        }
        None => PipelineConfig::load(g.config.as_deref(), &g.overrides)?,
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(w) = g.workers {
        cfg.workers = w;
    }
    if let Some(o) = &g.out_dir {
        cfg.paths.out_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one command and records its run manifest under `out_dir/runs/`.
pub fn execute(cfg: &PipelineConfig, cmd: &Command) -> Result<Outcome> {
    let started = now_unix();
    std::fs::create_dir_all(&cfg.paths.out_dir).map_err(CliError::io(&cfg.paths.out_dir))?;
    let outcome = match cmd {
        Command::Ingest => commands::ingest::cmd_ingest(cfg),
        Command::GenDataset { no_filter } => {
            let mut c = cfg.clone();
            if *no_filter {
                c.ablation.filter_dataset = false;
            }
            commands::dataset::cmd_gen_dataset(&c)
        }
        Command::TrainClassifier => commands::classifier::cmd_train_classifier(cfg),
        Command::Train { tier, fractions, name } => {
            commands::train::cmd_train(cfg, *tier, fractions, name.as_deref())
        }
        Command::Distill {
            teacher,
            student_tier,
            name,
        } => commands::train::cmd_distill(cfg, teacher.as_deref(), *student_tier, name.as_deref()),
        Command::Infer {
            checkpoint,
            filtered,
            unfiltered,
            output,
        } => {
            let filter = if *filtered {
                true
            } else if *unfiltered {
                false
            } else {
                cfg.ablation.filter_inference
            };
            commands::infer::cmd_infer(cfg, checkpoint.as_deref(), filter, output.as_deref())
        }
        Command::Eval { predictions, output } => {
            commands::eval::cmd_eval(cfg, predictions.as_deref(), output.as_deref())
        }
        Command::Stats {
            dataset,
            questions,
            output,
        } => commands::stats::cmd_stats(cfg, dataset.as_deref(), questions.as_deref(), output.as_deref()),
        Command::Bench {
            model,
            trials,
            filtered,
            output,
        } => commands::bench::cmd_bench(cfg, model, *trials, *filtered, output.as_deref()),
    }?;
    let manifest = RunManifest {
        command: cmd.name().to_string(),
        args: serde_json::to_value(cmd).expect("command serializes"),
        config: cfg.clone(),
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix: started,
        finished_unix: now_unix(),
        status: format!("{:?}", outcome.status).to_lowercase(),
        outputs: outcome.outputs.clone(),
    };
    manifest.save(&cfg.paths.runs().join(format!("{}.json", cmd.name())))?;
    Ok(outcome)
}

/// Parses nothing; runs an already-parsed command line and returns the exit code.
pub fn main_with(cli: Cli) -> i32 {
    let cfg = match resolve_config(&cli.global) {
        Ok(c) => c,
        Err(e) => {
            log::error!("{e}");
            return e.exit_code();
        }
    };
    if cfg.workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    match execute(&cfg, &cli.command) {
        Ok(o) => {
            for p in &o.outputs {
                log::info!("wrote {}", p.display());
            }
            o.status.exit_code()
        }
        Err(e) => {
            log::error!("{e}");
            e.exit_code()
        }
    }
}
