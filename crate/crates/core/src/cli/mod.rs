//! Command-line interface: every command reads files, writes an output
//! directory, and records a manifest of what it read and wrote.

pub mod commands;
pub mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::error::Error;

#[derive(Debug, Parser)]
#[command(name = "memeclust", version, about = "Cluster short messages into overlapping memes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse messages and write their protomemes with extraction statistics.
    Extract(ExtractArgs),
    /// Cluster protomemes and write dendrogram, partitions and message covers.
    Cluster(ClusterArgs),
    /// Score message covers against ground truth.
    Evaluate(EvaluateArgs),
    /// Search linear-combination weights on a simplex grid.
    Gridsearch(GridArgs),
    /// Cross-validate weight selection.
    Crossval(CrossvalArgs),
    /// Score the message-level baselines.
    Baseline(BaselineArgs),
    /// Compare hierarchical clustering with K-means at equal cluster counts.
    Compare(CompareArgs),
    /// Run an experiment described by a spec file.
    Experiment(ExperimentArgs),
    /// Write a seeded planted-topic corpus.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// JSON Lines messages.
    #[arg(long)]
    pub input: PathBuf,
    /// Field-mapping config (`key = path` lines).
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    /// Stopword list, one word per line (default: bundled English list).
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Duplicate handling: `exact` (same normalized text) or `none`.
    #[arg(long, default_value = "none")]
    pub dedup: String,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// JSON Lines messages.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long, default_value = "exact")]
    pub dedup: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CombinerArgs {
    /// `max` (default), `linear`, or `single:<t|u|c|d>`.
    #[arg(long)]
    pub combiner: Option<String>,
    /// Linear weights `t,c,u,d`; implies `--combiner linear`.
    #[arg(long, allow_hyphen_values = true)]
    pub weights: Option<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Single cut threshold.
    #[arg(long, conflicts_with = "tau_sweep")]
    pub tau: Option<f64>,
    /// `full`, `step:<s>`, or a comma-separated threshold list.
    #[arg(long)]
    pub tau_sweep: Option<String>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Protomemes as written by `extract`.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub combiner: CombinerArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// `hierarchical` or `kmeans` (content vectors).
    #[arg(long, default_value = "hierarchical")]
    pub algorithm: String,
    /// Cluster counts for K-means, comma-separated.
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Cover JSON: a list of clusters of message ids, or `cover.json` from `cluster`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub truth: PathBuf,
    /// Simplex step.
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CrossvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    /// Thresholds at which held-out folds are scored.
    #[arg(long, default_value = "step:0.05")]
    pub tau_sweep: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub truth: PathBuf,
    /// Follower graph (`user<TAB>f1,f2,...`); adds the follower-aware baseline.
    #[arg(long)]
    pub followers: Option<PathBuf>,
    #[arg(long, default_value = "full")]
    pub tau_sweep: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub truth: PathBuf,
    /// Cluster counts, comma-separated.
    #[arg(long, default_value = "10,20,30,40,50")]
    pub k: String,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment spec file.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    pub topics: usize,
    #[arg(long, default_value_t = 1000)]
    pub tweets: usize,
    #[arg(long, default_value_t = 0.08)]
    pub multi_topic_rate: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Machine-readable error line for stderr.
pub fn error_json(err: &Error) -> String {
    json!({ "error": err.kind(), "message": err.to_string() }).to_string()
}

pub fn run(cli: Cli) -> crate::Result<()> {
    match cli.command {
        Command::Extract(a) => commands::extract(&a),
        Command::Cluster(a) => commands::cluster(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Gridsearch(a) => commands::gridsearch(&a),
        Command::Crossval(a) => commands::crossval(&a),
        Command::Baseline(a) => commands::baseline(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Experiment(a) => commands::experiment(&a),
        Command::Synth(a) => commands::synth(&a),
    }
}
