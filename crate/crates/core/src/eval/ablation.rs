use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::evaluate;
use crate::corpus::{build_vocabulary, Corpus, Split, TokenMode};
use crate::error::{Error, Result};
use crate::graph::{build_graph_with, GraphOptions, TextGraph};
use crate::layers::GraphInputs;
use crate::numcore::Rng;
use crate::train::{fit, resolve_masks, train_with_inputs, TrainConfig};

pub const HEADS_CSV_HEADER: &str = "heads,test_accuracy,mean_epoch_ms,epochs";
pub const LABELS_CSV_HEADER: &str = "fraction,train_docs,test_accuracy";
pub const TOKENIZATION_CSV_HEADER: &str = "mode,nodes,edges,test_accuracy";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadRow {
    pub heads: usize,
    pub test_accuracy: f64,
    pub mean_epoch_ms: f64,
    pub epochs: usize,
}

impl HeadRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{:.3},{}",
            self.heads, self.test_accuracy, self.mean_epoch_ms, self.epochs
        )
    }

    /// One seeded run with `heads` hidden heads.
    pub fn run(
        graph: &TextGraph,
        inputs: &GraphInputs,
        base: &TrainConfig,
        heads: usize,
    ) -> Result<Self> {
        let mut config = base.clone();
        config.heads = heads;
        let out = train_with_inputs(graph, inputs, &config)?;
        let report = evaluate(&out.checkpoint, graph, inputs, Split::Test)?;
        Ok(Self {
            heads,
            test_accuracy: report.accuracy,
            mean_epoch_ms: out.log.mean_epoch_ms(),
            epochs: out.log.len(),
        })
    }
}

/// Test accuracy and mean epoch wall time for each hidden head count.
pub fn ablate_heads(
    graph: &TextGraph,
    inputs: &GraphInputs,
    base: &TrainConfig,
    head_counts: &[usize],
) -> Result<Vec<HeadRow>> {
    if head_counts.is_empty() {
        return Err(Error::InvalidConfig("no head counts given".into()));
    }
    head_counts
        .iter()
        .map(|&k| HeadRow::run(graph, inputs, base, k))
        .collect()
}

/// Keeps `round(fraction · n_c)` training documents of every class `c`,
/// chosen by a seeded shuffle within the class.
pub fn subsample_train_mask(
    train_mask: &[bool],
    labels: &[usize],
    class_names: &[String],
    fraction: f64,
    seed: u64,
) -> Result<Vec<bool>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "label fraction {fraction} outside (0, 1]"
        )));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, _) in train_mask.iter().enumerate().filter(|(_, &m)| m) {
        by_class.entry(labels[i]).or_default().push(i);
    }
    let mut rng = Rng::new(seed);
    let mut out = vec![false; train_mask.len()];
    for (class, name) in class_names.iter().enumerate() {
        let mut members = by_class.remove(&class).unwrap_or_default();
        let keep = (fraction * members.len() as f64).round() as usize;
        if keep == 0 {
            return Err(Error::ClassUnrepresented {
                class: name.clone(),
                fraction,
            });
        }
        rng.shuffle(&mut members);
        for &i in &members[..keep] {
            out[i] = true;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelFractionRow {
    pub fraction: f64,
    pub train_docs: usize,
    pub test_accuracy: f64,
}

impl LabelFractionRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{}",
            self.fraction, self.train_docs, self.test_accuracy
        )
    }

    /// One seeded run on a class-stratified subsample of the training
    /// documents. The validation documents are the same for every fraction.
    pub fn run(
        graph: &TextGraph,
        inputs: &GraphInputs,
        config: &TrainConfig,
        fraction: f64,
    ) -> Result<Self> {
        let (train, val) = resolve_masks(graph, config.seed)?;
        let sub = subsample_train_mask(
            &train,
            &graph.labels,
            &graph.class_names,
            fraction,
            config.seed,
        )?;
        let out = fit(graph, inputs, config, &sub, &val)?;
        let report = evaluate(&out.checkpoint, graph, inputs, Split::Test)?;
        Ok(Self {
            fraction,
            train_docs: sub.iter().filter(|&&m| m).count(),
            test_accuracy: report.accuracy,
        })
    }
}

pub fn ablate_label_fraction(
    graph: &TextGraph,
    inputs: &GraphInputs,
    config: &TrainConfig,
    fractions: &[f64],
) -> Result<Vec<LabelFractionRow>> {
    if fractions.is_empty() {
        return Err(Error::InvalidConfig("no label fractions given".into()));
    }
    fractions
        .iter()
        .map(|&f| LabelFractionRow::run(graph, inputs, config, f))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenizationRow {
    pub mode: TokenMode,
    pub nodes: usize,
    pub edges: usize,
    pub test_accuracy: f64,
}

impl TokenizationRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{}",
            self.mode, self.nodes, self.edges, self.test_accuracy
        )
    }

    pub fn run(
        corpus: &Corpus,
        config: &TrainConfig,
        allow_isolated_documents: bool,
    ) -> Result<Self> {
        let vocab = build_vocabulary(corpus)?;
        let graph = build_graph_with(
            corpus,
            &vocab,
            &GraphOptions {
                window_size: config.window_size,
                allow_isolated_documents,
            },
        )?;
        let inputs = GraphInputs::identity(&graph);
        let out = train_with_inputs(&graph, &inputs, config)?;
        let report = evaluate(&out.checkpoint, &graph, &inputs, Split::Test)?;
        Ok(Self {
            mode: corpus.mode(),
            nodes: graph.n_nodes(),
            edges: graph.edge_count(),
            test_accuracy: report.accuracy,
        })
    }
}

/// Errors unless both corpora hold the same documents (ids, labels and
/// splits) in the same order.
pub fn check_same_documents(a: &Corpus, b: &Corpus) -> Result<()> {
    let same = a.len() == b.len()
        && a.documents()
            .iter()
            .zip(b.documents())
            .all(|(x, y)| x.id == y.id && x.label == y.label && x.split == y.split);
    if same {
        Ok(())
    } else {
        Err(Error::InvalidConfig(
            "tokenization comparison needs the same documents in both corpora".into(),
        ))
    }
}

/// Builds and trains one graph per tokenization of the same documents.
pub fn compare_tokenization(
    corpus_char: &Corpus,
    corpus_word: &Corpus,
    config: &TrainConfig,
    allow_isolated_documents: bool,
) -> Result<[TokenizationRow; 2]> {
    check_same_documents(corpus_char, corpus_word)?;
    Ok([
        TokenizationRow::run(corpus_char, config, allow_isolated_documents)?,
        TokenizationRow::run(corpus_word, config, allow_isolated_documents)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|c| format!("c{c}")).collect()
    }

    #[test]
    fn subsample_is_stratified() {
        let labels: Vec<usize> = (0..100).map(|i| i % 4).collect();
        let mask = vec![true; 100];
        let sub = subsample_train_mask(&mask, &labels, &names(4), 0.2, 7).unwrap();
        for c in 0..4 {
            let kept = (0..100).filter(|&i| sub[i] && labels[i] == c).count();
            assert_eq!(kept, 5);
        }
        assert_eq!(
            subsample_train_mask(&mask, &labels, &names(4), 0.2, 7).unwrap(),
            sub
        );
    }

    #[test]
    fn full_fraction_is_identity() {
        let labels = vec![0, 1, 0, 1, 1];
        let mask = vec![true, true, false, true, true];
        assert_eq!(
            subsample_train_mask(&mask, &labels, &names(2), 1.0, 3).unwrap(),
            mask
        );
    }

    #[test]
    fn unrepresented_class() {
        let labels = vec![0, 0, 0, 0, 1];
        let err = subsample_train_mask(&[true; 5], &labels, &names(2), 0.2, 0).unwrap_err();
        assert!(matches!(err, Error::ClassUnrepresented { ref class, .. } if class == "c1"));
        assert!(subsample_train_mask(&[true; 5], &labels, &names(2), 0.0, 0).is_err());
        assert!(subsample_train_mask(&[true; 5], &labels, &names(2), 1.5, 0).is_err());
    }
}
