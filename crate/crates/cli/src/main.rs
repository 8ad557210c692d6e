//! `textgat`: ingest → build-graph → train → evaluate → predict → ablate,
//! plus a synthetic corpus generator.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "textgat",
    version,
    about = "Graph attention text classification over a document/term graph"
)]
pub(crate) struct Cli {
    #[command(subcommand)]
    pub(crate) command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Tokenize a JSON-lines corpus and write the canonical corpus file.
    Ingest(IngestArgs),
    /// Build the document/term graph from a canonical corpus.
    BuildGraph(BuildGraphArgs),
    /// Train a model on a graph.
    Train(TrainArgs),
    /// Score a checkpoint on one split.
    Evaluate(EvaluateArgs),
    /// Write per-document predictions.
    Predict(PredictArgs),
    /// Run the head-count, label-fraction or tokenization ablation.
    Ablate(AblateArgs),
    /// Generate a synthetic labeled corpus.
    Synth(SynthArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Char,
    Word,
}

#[derive(Debug, Args, Serialize)]
struct IngestArgs {
    /// JSON lines with `id`, `text`, `label` and `split`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Word)]
    mode: ModeArg,
    /// One stopword per line.
    #[arg(long)]
    stoplist: Option<PathBuf>,
    /// Canonical corpus file; stats go to `<out>.stats.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct BuildGraphArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 25)]
    window_size: usize,
    /// Keep documents whose only edge is the self-loop.
    #[arg(long)]
    allow_isolated: bool,
    #[arg(long)]
    out: PathBuf,
}

/// Training hyperparameters shared by `train`, `evaluate --repeats` and
/// `ablate`. A config file is read first, then flags override it.
#[derive(Debug, Clone, Args, Serialize)]
struct ConfigArgs {
    /// TOML file whose keys are training config field names.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    architecture: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    hidden_units: Option<usize>,
    #[arg(long)]
    heads: Option<usize>,
    #[arg(long)]
    output_heads: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    patience: Option<usize>,
    /// Any other config field as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Args, Serialize)]
struct TrainArgs {
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    /// Receives checkpoint.bin, runlog.csv and manifest.json.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SplitArg {
    Train,
    Val,
    Test,
}

#[derive(Debug, Args, Serialize)]
struct EvaluateArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long, value_enum, default_value_t = SplitArg::Test)]
    split: SplitArg,
    /// Retrain with seeds seed+0..R-1 from the checkpoint's config and
    /// report mean and standard deviation.
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// With repeats ≥ 2, also retrain this architecture and report a Welch
    /// t-test of accuracies against it. The p-value is an approximation
    /// over per-seed runs, not a paired test.
    #[arg(long)]
    baseline: Option<String>,
    /// Receives report.json, report.csv and manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct PredictArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    checkpoint: PathBuf,
    /// CSV of `id,predicted,<class probabilities>`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum AblationKind {
    Heads,
    Labels,
    Tokenization,
}

#[derive(Debug, Args, Serialize)]
struct AblateArgs {
    #[arg(long, value_enum)]
    kind: AblationKind,
    /// Graph for the heads and labels ablations.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "1,4,8,12")]
    head_counts: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.4,0.6,0.8,1.0")]
    fractions: Vec<f64>,
    /// Canonical char-mode corpus for the tokenization ablation.
    #[arg(long)]
    char_corpus: Option<PathBuf>,
    /// Canonical word-mode corpus for the tokenization ablation.
    #[arg(long)]
    word_corpus: Option<PathBuf>,
    #[arg(long)]
    allow_isolated: bool,
    #[command(flatten)]
    config: ConfigArgs,
    /// Parallel runs. Epoch timings are only comparable with --jobs 1.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Receives `<kind>.csv` and manifest.json.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct SynthArgs {
    #[arg(long, default_value_t = 5)]
    classes: usize,
    #[arg(long, default_value_t = 200)]
    docs_per_class: usize,
    #[arg(long, default_value_t = 40)]
    vocab_per_class: usize,
    /// Size of the vocabulary shared by all classes.
    #[arg(long, default_value_t = 20)]
    overlap: usize,
    #[arg(long, default_value_t = 0.3)]
    overlap_rate: f64,
    #[arg(long, default_value_t = 12)]
    min_len: usize,
    #[arg(long, default_value_t = 24)]
    max_len: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// JSON-lines corpus accepted by `ingest`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse_from(&argv);
    match commands::dispatch(cli.command, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
