//! Confusion matrices, one-vs-rest metrics, repeated-run statistics and
//! the ablation harnesses.

mod ablation;
mod stats;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use ablation::{
    ablate_heads, ablate_label_fraction, check_same_documents, compare_tokenization,
    subsample_train_mask, HeadRow, LabelFractionRow, TokenizationRow, HEADS_CSV_HEADER,
    LABELS_CSV_HEADER, TOKENIZATION_CSV_HEADER,
};
pub use stats::{evaluate_repeats, mean_std, welch_t_test, RepeatSummary, TTest};

use crate::corpus::Split;
use crate::error::{Error, Result};
use crate::graph::TextGraph;
use crate::layers::GraphInputs;
use crate::train::{argmax_rows, predict_probs, Checkpoint};

/// Counts indexed `[true][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        Self {
            classes,
            counts: vec![0; classes * classes],
        }
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.classes + predicted]
    }

    pub fn add(&mut self, truth: usize, predicted: usize) {
        self.counts[truth * self.classes + predicted] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes).map(|c| self.get(c, c)).sum()
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts
            .chunks(self.classes.max(1))
            .map(<[u64]>::to_vec)
            .collect()
    }

    /// One-vs-rest `(tp, fn, fp, tn)` for `class`.
    pub fn one_vs_rest(&self, class: usize) -> (u64, u64, u64, u64) {
        let tp = self.get(class, class);
        let row: u64 = (0..self.classes).map(|p| self.get(class, p)).sum();
        let col: u64 = (0..self.classes).map(|t| self.get(t, class)).sum();
        let fn_ = row - tp;
        let fp = col - tp;
        (tp, fn_, fp, self.total() - tp - fn_ - fp)
    }
}

/// Tallies masked documents. `preds` and `labels` are indexed by node; only
/// positions where `mask` is set are counted.
pub fn confusion(
    preds: &[usize],
    labels: &[usize],
    mask: &[bool],
    classes: usize,
) -> Result<ConfusionMatrix> {
    if preds.len() < mask.len() || labels.len() < mask.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions and {} labels for a mask of {}",
            preds.len(),
            labels.len(),
            mask.len()
        )));
    }
    if !mask.iter().any(|&m| m) {
        return Err(Error::EmptyMask("evaluation"));
    }
    let mut cm = ConfusionMatrix::new(classes);
    for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        for v in [labels[i], preds[i]] {
            if v >= classes {
                return Err(Error::LabelOutOfRange { label: v, classes });
            }
        }
        cm.add(labels[i], preds[i]);
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub class_names: Vec<String>,
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    /// Harmonic mean of macro precision and macro recall, not the mean of
    /// the per-class F scores.
    pub macro_f: f64,
    pub confusion: ConfusionMatrix,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Metrics from a confusion matrix. Class names default to the indices.
pub fn metrics(cm: &ConfusionMatrix) -> MetricsReport {
    metrics_named(cm, (0..cm.classes()).map(|c| c.to_string()).collect())
}

pub fn metrics_named(cm: &ConfusionMatrix, class_names: Vec<String>) -> MetricsReport {
    let per_class: Vec<ClassMetrics> = (0..cm.classes())
        .map(|c| {
            let (tp, fn_, fp, _) = cm.one_vs_rest(c);
            let precision = ratio(tp, tp + fp);
            let recall = ratio(tp, tp + fn_);
            ClassMetrics {
                precision,
                recall,
                f_score: harmonic(precision, recall),
            }
        })
        .collect();
    let k = per_class.len().max(1) as f64;
    let macro_precision = per_class.iter().map(|m| m.precision).sum::<f64>() / k;
    let macro_recall = per_class.iter().map(|m| m.recall).sum::<f64>() / k;
    MetricsReport {
        class_names,
        per_class,
        accuracy: ratio(cm.trace(), cm.total()),
        macro_precision,
        macro_recall,
        macro_f: harmonic(macro_precision, macro_recall),
        confusion: cm.clone(),
    }
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "class,precision,recall,f_score";

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per class followed by `accuracy` and `macro` rows.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for (name, m) in self.class_names.iter().zip(&self.per_class) {
            let _ = writeln!(out, "{name},{},{},{}", m.precision, m.recall, m.f_score);
        }
        let _ = writeln!(out, "accuracy,{0},{0},{0}", self.accuracy);
        let _ = writeln!(
            out,
            "macro,{},{},{}",
            self.macro_precision, self.macro_recall, self.macro_f
        );
        out
    }
}

/// Runs the checkpoint over the graph and scores the documents of `split`.
pub fn evaluate(
    checkpoint: &Checkpoint,
    graph: &TextGraph,
    inputs: &GraphInputs,
    split: Split,
) -> Result<MetricsReport> {
    let probs = predict_probs(checkpoint, inputs)?;
    let preds = argmax_rows(&probs);
    let cm = confusion(&preds, &graph.labels, graph.mask(split), graph.n_classes())?;
    Ok(metrics_named(&cm, graph.class_names.clone()))
}
