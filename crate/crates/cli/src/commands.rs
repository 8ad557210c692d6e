use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Parser;
use rayon::prelude::*;
use serde::Serialize;
use textgat::corpus::{self, Corpus, Split, TokenMode};
use textgat::eval::{
    check_same_documents, evaluate, evaluate_repeats, welch_t_test, HeadRow, LabelFractionRow,
    RepeatSummary, TTest, TokenizationRow, HEADS_CSV_HEADER, LABELS_CSV_HEADER,
    TOKENIZATION_CSV_HEADER,
};
use textgat::graph::{build_graph_with, GraphOptions};
use textgat::layers::GraphInputs;
use textgat::synth::SynthParams;
use textgat::train::{self, Checkpoint, TrainConfig};
use textgat::TextGraph;

use crate::manifest::{beside, Manifest};
use crate::{
    AblateArgs, AblationKind, BuildGraphArgs, Cli, Command, ConfigArgs, EvaluateArgs, IngestArgs,
    ModeArg, PredictArgs, ReplayArgs, SplitArg, SynthArgs, TrainArgs,
};

pub fn dispatch(command: Command, argv: &[String]) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest(&a, argv),
        Command::BuildGraph(a) => build_graph(&a, argv),
        Command::Train(a) => train_cmd(&a, argv),
        Command::Evaluate(a) => evaluate_cmd(&a, argv),
        Command::Predict(a) => predict(&a, argv),
        Command::Ablate(a) => ablate(&a, argv),
        Command::Synth(a) => synth(&a, argv),
        Command::Replay(a) => replay(&a),
    }
}

impl From<ModeArg> for TokenMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Char => TokenMode::Char,
            ModeArg::Word => TokenMode::Word,
        }
    }
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Val => Split::Val,
            SplitArg::Test => Split::Test,
        }
    }
}

/// Fails early if `path` cannot be written.
fn writable_file(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::OpenOptions::new()
        .append(true)
        .create(true)
        .open(path)
        .with_context(|| format!("{} is not writable", path.display()))?;
    Ok(())
}

fn writable_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let probe = dir.join(".textgat-write-probe");
    fs::write(&probe, b"").with_context(|| format!("{} is not writable", dir.display()))?;
    fs::remove_file(&probe)?;
    Ok(())
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn resolve_config(args: &ConfigArgs) -> Result<TrainConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?
        }
        None => TrainConfig::default(),
    };
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut flag = |key: &str, value: Option<String>| {
        if let Some(v) = value {
            pairs.push((key.to_string(), v));
        }
    };
    flag("architecture", args.architecture.clone());
    flag("epochs", args.epochs.map(|v| v.to_string()));
    flag("learning_rate", args.learning_rate.map(|v| v.to_string()));
    flag("hidden_units", args.hidden_units.map(|v| v.to_string()));
    flag("heads", args.heads.map(|v| v.to_string()));
    flag("output_heads", args.output_heads.map(|v| v.to_string()));
    flag("dropout", args.dropout.map(|v| v.to_string()));
    flag("l2", args.l2.map(|v| v.to_string()));
    flag("seed", args.seed.map(|v| v.to_string()));
    flag("patience", args.patience.map(|v| v.to_string()));
    for item in &args.set {
        let (k, v) = item
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got `{item}`"))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    config.apply_overrides(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
    config.validate()?;
    Ok(config)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    if jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
}

fn ingest(a: &IngestArgs, argv: &[String]) -> Result<()> {
    writable_file(&a.out)?;
    let stats_path = PathBuf::from(format!("{}.stats.json", a.out.display()));
    let raw = corpus::ingest(&a.input, a.mode.into())?;
    let stoplist = match &a.stoplist {
        Some(p) => corpus::load_stoplist(p)?,
        None => HashSet::new(),
    };
    let cleaned = corpus::preprocess(&raw, &stoplist)?;
    cleaned.save_canonical(&a.out)?;
    let stats = corpus::corpus_stats(&cleaned)?;
    write(&stats_path, json(&stats)?)?;
    eprintln!(
        "ingested {} documents into {}",
        cleaned.len(),
        a.out.display()
    );
    Manifest::new("ingest", argv, a)?.write(&beside(&a.out), &[&a.out, &stats_path])
}

#[derive(Serialize)]
struct GraphSummary {
    nodes: usize,
    documents: usize,
    terms: usize,
    /// Undirected edges, self-loops included.
    edges: usize,
    window_size: usize,
    #[serde(rename = "W")]
    windows: u64,
}

fn build_graph(a: &BuildGraphArgs, argv: &[String]) -> Result<()> {
    writable_file(&a.out)?;
    let corpus = Corpus::load_canonical(&a.corpus)?;
    let vocab = corpus::build_vocabulary(&corpus)?;
    let opts = GraphOptions {
        window_size: a.window_size,
        allow_isolated_documents: a.allow_isolated,
    };
    let graph = build_graph_with(&corpus, &vocab, &opts)?;
    graph.save(&a.out)?;
    let summary = GraphSummary {
        nodes: graph.n_nodes(),
        documents: graph.n_docs,
        terms: graph.n_terms,
        edges: graph.edge_count(),
        window_size: graph.window_size,
        windows: graph.window_count,
    };
    print!("{}", json(&summary)?);
    Manifest::new("build-graph", argv, a)?
        .resolved(&summary)?
        .write(&beside(&a.out), &[&a.out])
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    config: &'a TrainConfig,
    best_epoch: usize,
    best_val_loss: f64,
    epochs_run: usize,
    stopped_early: bool,
}

fn train_cmd(a: &TrainArgs, argv: &[String]) -> Result<()> {
    writable_dir(&a.out_dir)?;
    let config = resolve_config(&a.config)?;
    let graph = TextGraph::load(&a.graph)?;
    let out = train::train(&graph, &config)?;
    let ckpt = a.out_dir.join("checkpoint.bin");
    let log = a.out_dir.join("runlog.csv");
    out.checkpoint.save(&ckpt)?;
    write(&log, out.log.to_csv())?;
    let summary = TrainSummary {
        config: &config,
        best_epoch: out.checkpoint.epoch,
        best_val_loss: out.best_val_loss,
        epochs_run: out.log.len(),
        stopped_early: out.stopped_early,
    };
    eprintln!(
        "trained {} epochs; best validation loss {:.6} at epoch {}",
        summary.epochs_run, summary.best_val_loss, summary.best_epoch
    );
    Manifest::new("train", argv, a)?
        .resolved(&summary)?
        .write(&a.out_dir.join("manifest.json"), &[&ckpt])
}

#[derive(Serialize)]
struct RepeatedEvaluation {
    split: Split,
    summary: RepeatSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<RepeatSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_test: Option<TTest>,
}

fn evaluate_cmd(a: &EvaluateArgs, argv: &[String]) -> Result<()> {
    writable_dir(&a.out)?;
    let graph = TextGraph::load(&a.graph)?;
    let checkpoint = Checkpoint::load(&a.checkpoint)?;
    let inputs = GraphInputs::identity(&graph);
    let split: Split = a.split.into();
    let json_path = a.out.join("report.json");
    let csv_path = a.out.join("report.csv");
    if a.repeats <= 1 {
        if a.baseline.is_some() {
            bail!("--baseline needs --repeats of at least 2");
        }
        let report = evaluate(&checkpoint, &graph, &inputs, split)?;
        write(&json_path, report.to_json() + "\n")?;
        write(&csv_path, report.to_csv())?;
        eprintln!(
            "{split} accuracy {:.4}, macro-F {:.4}",
            report.accuracy, report.macro_f
        );
    } else {
        let summary = evaluate_repeats(&graph, &inputs, &checkpoint.train, split, a.repeats)?;
        let (baseline, t_test) = match &a.baseline {
            Some(arch) => {
                let mut c = checkpoint.train.clone();
                c.apply_overrides([("architecture", arch.as_str())])?;
                let b = evaluate_repeats(&graph, &inputs, &c, split, a.repeats)?;
                let t = welch_t_test(&summary.accuracies(), &b.accuracies())?;
                (Some(b), Some(t))
            }
            None => (None, None),
        };
        let mut csv = summary.to_csv();
        if let Some(b) = &baseline {
            for line in b.to_csv().lines().skip(1) {
                let _ = writeln!(csv, "baseline_{line}");
            }
        }
        write(&csv_path, csv)?;
        eprintln!(
            "{split} accuracy {:.4} ± {:.4} over {} runs",
            summary.accuracy.0, summary.accuracy.1, a.repeats
        );
        let out = RepeatedEvaluation {
            split,
            summary,
            baseline,
            t_test,
        };
        write(&json_path, json(&out)?)?;
    }
    Manifest::new("evaluate", argv, a)?
        .write(&a.out.join("manifest.json"), &[&json_path, &csv_path])
}

fn predict(a: &PredictArgs, argv: &[String]) -> Result<()> {
    writable_file(&a.out)?;
    let graph = TextGraph::load(&a.graph)?;
    let checkpoint = Checkpoint::load(&a.checkpoint)?;
    let preds = train::predict(&checkpoint, &graph)?;
    let mut csv = format!("id,split,predicted,{}\n", graph.class_names.join(","));
    for p in &preds {
        let split = [Split::Train, Split::Val, Split::Test]
            .into_iter()
            .find(|&s| graph.mask(s)[p.doc])
            .map_or("", Split::as_str);
        let probs: Vec<String> = p.probs.iter().map(f64::to_string).collect();
        let _ = writeln!(
            csv,
            "{},{split},{},{}",
            graph.doc_ids[p.doc],
            graph.class_names[p.class],
            probs.join(",")
        );
    }
    write(&a.out, csv)?;
    Manifest::new("predict", argv, a)?.write(&beside(&a.out), &[&a.out])
}

fn ablate(a: &AblateArgs, argv: &[String]) -> Result<()> {
    writable_dir(&a.out_dir)?;
    let config = resolve_config(&a.config)?;
    let pool = pool(a.jobs)?;
    let need_graph = || -> Result<TextGraph> {
        let path = a
            .graph
            .as_ref()
            .context("--graph is required for this ablation")?;
        Ok(TextGraph::load(path)?)
    };
    let (name, csv) = match a.kind {
        AblationKind::Heads => {
            let graph = need_graph()?;
            let inputs = GraphInputs::identity(&graph);
            if a.head_counts.is_empty() {
                bail!("no head counts given");
            }
            let rows: Vec<HeadRow> = pool.install(|| {
                a.head_counts
                    .par_iter()
                    .map(|&k| HeadRow::run(&graph, &inputs, &config, k))
                    .collect::<textgat::Result<_>>()
            })?;
            let lines: Vec<String> = rows.iter().map(HeadRow::csv_line).collect();
            (
                "heads.csv",
                format!("{HEADS_CSV_HEADER}\n{}\n", lines.join("\n")),
            )
        }
        AblationKind::Labels => {
            let graph = need_graph()?;
            let inputs = GraphInputs::identity(&graph);
            if a.fractions.is_empty() {
                bail!("no label fractions given");
            }
            let rows: Vec<LabelFractionRow> = pool.install(|| {
                a.fractions
                    .par_iter()
                    .map(|&f| LabelFractionRow::run(&graph, &inputs, &config, f))
                    .collect::<textgat::Result<_>>()
            })?;
            let lines: Vec<String> = rows.iter().map(LabelFractionRow::csv_line).collect();
            (
                "labels.csv",
                format!("{LABELS_CSV_HEADER}\n{}\n", lines.join("\n")),
            )
        }
        AblationKind::Tokenization => {
            let load = |p: &Option<PathBuf>, flag: &str, mode: TokenMode| -> Result<Corpus> {
                let path = p
                    .as_ref()
                    .with_context(|| format!("{flag} is required for this ablation"))?;
                let c = Corpus::load_canonical(path)?;
                if c.mode() != mode {
                    bail!(
                        "{} is a {} corpus, expected {mode}",
                        path.display(),
                        c.mode()
                    );
                }
                Ok(c)
            };
            let corpora = [
                load(&a.char_corpus, "--char-corpus", TokenMode::Char)?,
                load(&a.word_corpus, "--word-corpus", TokenMode::Word)?,
            ];
            check_same_documents(&corpora[0], &corpora[1])?;
            let rows: Vec<TokenizationRow> = pool.install(|| {
                corpora
                    .par_iter()
                    .map(|c| TokenizationRow::run(c, &config, a.allow_isolated))
                    .collect::<textgat::Result<_>>()
            })?;
            let lines: Vec<String> = rows.iter().map(TokenizationRow::csv_line).collect();
            (
                "tokenization.csv",
                format!("{TOKENIZATION_CSV_HEADER}\n{}\n", lines.join("\n")),
            )
        }
    };
    let path = a.out_dir.join(name);
    write(&path, &csv)?;
    eprint!("{csv}");
    Manifest::new("ablate", argv, a)?
        .resolved(&config)?
        .write(&a.out_dir.join("manifest.json"), &[&path])
}

fn synth(a: &SynthArgs, argv: &[String]) -> Result<()> {
    writable_file(&a.out)?;
    let params = SynthParams {
        classes: a.classes,
        docs_per_class: a.docs_per_class,
        vocab_per_class: a.vocab_per_class,
        overlap: a.overlap,
        overlap_rate: a.overlap_rate,
        min_len: a.min_len,
        max_len: a.max_len,
        seed: a.seed,
    };
    write(&a.out, params.to_jsonl()?)?;
    eprintln!(
        "wrote {} documents to {}",
        a.classes * a.docs_per_class,
        a.out.display()
    );
    Manifest::new("synth", argv, a)?.write(&beside(&a.out), &[&a.out])
}

fn replay(a: &ReplayArgs) -> Result<()> {
    let manifest = Manifest::read(&a.manifest)?;
    std::env::set_current_dir(&manifest.cwd)
        .with_context(|| format!("entering recorded directory {}", manifest.cwd.display()))?;
    let cli = Cli::try_parse_from(&manifest.argv)?;
    if matches!(cli.command, Command::Replay(_)) {
        bail!("manifest records a replay; replay its target instead");
    }
    dispatch(cli.command, &manifest.argv)
}
