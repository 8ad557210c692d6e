//! Heterogeneous document/term graph construction.
//!
//! Node `k < n_docs` is document `k` in corpus order; node `n_docs + t` is
//! the term with vocabulary index `t`. Edge weights:
//!
//! | pair              | weight                         |
//! |-------------------|--------------------------------|
//! | term, term        | positive PMI over windows      |
//! | document, term    | positive TF-IDF                |
//! | node, itself      | 1                              |
//! | anything else     | no edge                        |

mod format;
mod window;

use std::collections::HashMap;

pub use format::GRAPH_FORMAT_VERSION;
pub use window::{count_windows, idf, pmi, tf_idf, WindowStats};

use crate::corpus::{Corpus, Split, Vocabulary};
use crate::error::{Error, Result};
use crate::numcore::SparseMatrix;
use window::{doc_term_ids, tf_idf_weight};

pub const DEFAULT_WINDOW_SIZE: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphOptions {
    pub window_size: usize,
    /// Admit documents whose only edge is the self-loop instead of failing.
    pub allow_isolated_documents: bool,
}

impl Default for GraphOptions {
    fn default() -> Self {
        Self {
            window_size: DEFAULT_WINDOW_SIZE,
            allow_isolated_documents: false,
        }
    }
}

/// The assembled graph plus everything needed to train and report on it.
#[derive(Debug, Clone, PartialEq)]
pub struct TextGraph {
    pub n_docs: usize,
    pub n_terms: usize,
    pub window_size: usize,
    /// Total sliding windows counted during construction.
    pub window_count: u64,
    /// Symmetric, unit diagonal.
    pub adjacency: SparseMatrix,
    /// Class index per document.
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub doc_ids: Vec<String>,
    pub terms: Vec<String>,
    pub train_mask: Vec<bool>,
    pub val_mask: Vec<bool>,
    pub test_mask: Vec<bool>,
}

impl TextGraph {
    pub fn n_nodes(&self) -> usize {
        self.n_docs + self.n_terms
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Number of undirected non-loop edges.
    pub fn edge_count(&self) -> usize {
        (self.adjacency.nnz() - self.n_nodes()) / 2
    }

    pub fn mask(&self, split: Split) -> &[bool] {
        match split {
            Split::Train => &self.train_mask,
            Split::Val => &self.val_mask,
            Split::Test => &self.test_mask,
        }
    }

    pub fn term_node(&self, term_index: usize) -> usize {
        self.n_docs + term_index
    }
}

/// Builds the graph, failing on documents with no positive TF-IDF edge.
pub fn build_graph(corpus: &Corpus, vocab: &Vocabulary, window_size: usize) -> Result<TextGraph> {
    build_graph_with(
        corpus,
        vocab,
        &GraphOptions {
            window_size,
            allow_isolated_documents: false,
        },
    )
}

pub fn build_graph_with(
    corpus: &Corpus,
    vocab: &Vocabulary,
    opts: &GraphOptions,
) -> Result<TextGraph> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if opts.window_size == 0 {
        return Err(Error::InvalidConfig(
            "window size must be at least 1".into(),
        ));
    }
    let empty: Vec<String> = corpus
        .documents()
        .iter()
        .filter(|d| d.tokens.is_empty())
        .map(|d| d.id.clone())
        .collect();
    if !empty.is_empty() {
        return Err(Error::EmptyDocuments(empty));
    }

    let n_docs = corpus.len();
    let n_terms = vocab.len();
    let n = n_docs + n_terms;
    let mut triplets: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 1.0)).collect();

    let mut isolated = Vec::new();
    for (d, doc) in corpus.documents().iter().enumerate() {
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for t in doc_term_ids(doc, vocab) {
            *counts.entry(t).or_insert(0) += 1;
        }
        let mut terms: Vec<(usize, usize)> = counts.into_iter().collect();
        terms.sort_unstable();
        let mut linked = false;
        for (t, tf) in terms {
            if let Some(w) = tf_idf_weight(tf, n_docs, vocab.document_frequency(t)) {
                triplets.push((d, n_docs + t, w));
                triplets.push((n_docs + t, d, w));
                linked = true;
            }
        }
        if !linked {
            isolated.push(doc.id.clone());
        }
    }
    if !isolated.is_empty() && !opts.allow_isolated_documents {
        return Err(Error::IsolatedDocuments(isolated));
    }

    let stats = count_windows(corpus, vocab, opts.window_size);
    let mut pairs: Vec<(usize, usize)> = stats.pair.keys().copied().collect();
    pairs.sort_unstable();
    for (i, j) in pairs {
        if let Some(w) = pmi(&stats, i, j) {
            triplets.push((n_docs + i, n_docs + j, w));
            triplets.push((n_docs + j, n_docs + i, w));
        }
    }
    let adjacency = SparseMatrix::from_triplets(n, n, &triplets)?;

    let docs = corpus.documents();
    let labels = docs
        .iter()
        .map(|d| {
            corpus
                .class_index(&d.label)
                .expect("label in corpus label set")
        })
        .collect();
    let mask = |s: Split| docs.iter().map(|d| d.split == s).collect::<Vec<_>>();
    Ok(TextGraph {
        n_docs,
        n_terms,
        window_size: opts.window_size,
        window_count: stats.total,
        adjacency,
        labels,
        class_names: corpus.labels().to_vec(),
        doc_ids: docs.iter().map(|d| d.id.clone()).collect(),
        terms: vocab.terms().to_vec(),
        train_mask: mask(Split::Train),
        val_mask: mask(Split::Val),
        test_mask: mask(Split::Test),
    })
}

/// `D^{-1/2} (A + I) D^{-1/2}` with degrees taken from the weighted `A + I`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency(pub SparseMatrix);

pub fn normalize_adjacency(graph: &TextGraph) -> NormalizedAdjacency {
    normalize(&graph.adjacency)
}

pub fn normalize(adjacency: &SparseMatrix) -> NormalizedAdjacency {
    let n = adjacency.rows();
    let identity: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 1.0)).collect();
    let mut triplets: Vec<(usize, usize, f64)> = adjacency.iter().collect();
    triplets.extend(identity);
    let tilde = SparseMatrix::from_triplets(n, n, &triplets).expect("square");
    let inv_sqrt: Vec<f64> = tilde
        .row_sums()
        .into_iter()
        .map(|d| {
            assert!(d > 0.0, "zero degree in adjacency with self-loops");
            1.0 / d.sqrt()
        })
        .collect();
    NormalizedAdjacency(tilde.map_values(|r, c, v| v * (inv_sqrt[r] * inv_sqrt[c])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocabulary, Document, TokenMode};

    pub(crate) fn corpus(texts: &[&str]) -> Corpus {
        let docs = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Document {
                id: format!("d{i}"),
                raw_text: t.to_string(),
                label: if i % 2 == 0 { "p" } else { "q" }.into(),
                split: Split::Train,
                tokens: TokenMode::Word.tokenize(t),
            })
            .collect();
        Corpus::new(TokenMode::Word, docs).unwrap()
    }

    /// Enumerates every window by hand for the small fixture.
    #[test]
    fn windows_on_fixture() {
        let c = corpus(&["a b", "a b", "c d"]);
        let v = build_vocabulary(&c).unwrap();
        let s = count_windows(&c, &v, 2);
        let (a, b) = (v.get("a").unwrap(), v.get("b").unwrap());
        assert_eq!(s.total, 3);
        assert_eq!(s.term[a], 2);
        assert_eq!(s.pair_count(a, b), 2);
        assert_eq!(s.pair_count(b, a), 2);
    }

    #[test]
    fn short_document_is_one_window() {
        let c = corpus(&["x y z"]);
        let v = build_vocabulary(&c).unwrap();
        let s = count_windows(&c, &v, 25);
        assert_eq!(s.total, 1);
        assert_eq!(s.pair.len(), 3);
        let s = count_windows(&c, &v, 2);
        assert_eq!(s.total, 2);
    }

    #[test]
    fn pair_counted_once_per_window() {
        let c = corpus(&["a b a b"]);
        let v = build_vocabulary(&c).unwrap();
        let s = count_windows(&c, &v, 4);
        assert_eq!((s.total, s.pair_count(0, 1)), (1, 1));
    }

    #[test]
    fn pmi_fixture() {
        let c = corpus(&["a b", "a b", "c d"]);
        let v = build_vocabulary(&c).unwrap();
        let s = count_windows(&c, &v, 2);
        let id = |t| v.get(t).unwrap();
        let ab = pmi(&s, id("a"), id("b")).unwrap();
        // p(a,b) = 2/3, p(a) = p(b) = 2/3
        assert!((ab - ((2.0 / 3.0) / ((2.0 / 3.0) * (2.0 / 3.0f64))).ln()).abs() < 1e-15);
        assert!((ab - 1.5f64.ln()).abs() < 1e-12);
        assert_eq!(pmi(&s, id("a"), id("c")), None);
        assert_eq!(pmi(&s, id("b"), id("a")), Some(ab));
    }

    #[test]
    fn pmi_at_independence_is_none() {
        // W = 4, W(a) = W(b) = 2, W(a,b) = 1.
        let c = corpus(&["a b", "a", "b", "c"]);
        let v = build_vocabulary(&c).unwrap();
        let s = count_windows(&c, &v, 2);
        assert_eq!(pmi(&s, 0, 1), None);
    }

    #[test]
    fn tf_idf_cases() {
        let c = corpus(&["x x", "y", "z"]);
        let v = build_vocabulary(&c).unwrap();
        let d0 = &c.documents()[0];
        let w = tf_idf(&c, &v, d0, "x").unwrap();
        assert!((w - 2.0 * 1.5f64.ln()).abs() < 1e-12);
        assert!((w - 0.8109302162163288).abs() < 1e-12);
        assert_eq!(tf_idf(&c, &v, d0, "y"), None);

        let all = corpus(&["s", "s t"]);
        let v = build_vocabulary(&all).unwrap();
        assert!(idf(2, 2) < 0.0);
        assert_eq!(tf_idf(&all, &v, &all.documents()[0], "s"), None);
    }

    #[test]
    fn fixture_graph_shape() {
        let c = corpus(&["a b", "a b", "c d"]);
        let v = build_vocabulary(&c).unwrap();
        // a and b appear in 2 of 3 documents, so their IDF is ln(3/3) = 0
        // and the first two documents have no document-term edge.
        match build_graph(&c, &v, 2) {
            Err(Error::IsolatedDocuments(ids)) => assert_eq!(ids, ["d0", "d1"]),
            other => panic!("unexpected {other:?}"),
        }
        let g = build_graph_with(
            &c,
            &v,
            &GraphOptions {
                window_size: 2,
                allow_isolated_documents: true,
            },
        )
        .unwrap();
        assert_eq!(g.n_nodes(), 7);
        assert!(g.adjacency.is_symmetric());
        let word_edges: Vec<(&str, &str)> = g
            .adjacency
            .iter()
            .filter(|&(r, c, _)| r >= 3 && c > r)
            .map(|(r, c, _)| (v.term(r - 3), v.term(c - 3)))
            .collect();
        assert_eq!(word_edges, [("a", "b"), ("c", "d")]);
        for i in 0..7 {
            assert_eq!(g.adjacency.get(i, i), 1.0);
        }
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(g.adjacency.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn single_document_single_term() {
        let docs = vec![Document {
            id: "only".into(),
            raw_text: "w".into(),
            label: "p".into(),
            split: Split::Train,
            tokens: vec!["w".into()],
        }];
        let c = Corpus::new(TokenMode::Word, docs).unwrap();
        let v = build_vocabulary(&c).unwrap();
        // N = 1, df = 1: ln(1/2) < 0, so the single edge needs N > df + 1.
        assert!(build_graph(&c, &v, 25).is_err());
    }

    #[test]
    fn normalization_of_identity() {
        let a = SparseMatrix::identity(2);
        let NormalizedAdjacency(norm) = normalize(&a);
        let id = crate::numcore::DenseMatrix::identity(2);
        assert!(norm.to_dense().max_abs_diff(&id) < 1e-15);
    }

    #[test]
    fn normalization_preserves_pattern_and_symmetry() {
        let c = corpus(&["a b c", "b c d", "e f", "a f g"]);
        let v = build_vocabulary(&c).unwrap();
        let g = build_graph_with(
            &c,
            &v,
            &GraphOptions {
                window_size: 2,
                allow_isolated_documents: true,
            },
        )
        .unwrap();
        let NormalizedAdjacency(norm) = normalize_adjacency(&g);
        assert!(norm.is_symmetric());
        assert_eq!(norm.offsets(), g.adjacency.offsets());
        assert_eq!(norm.indices(), g.adjacency.indices());
    }
}
