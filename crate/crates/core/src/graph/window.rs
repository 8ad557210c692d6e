use std::collections::HashMap;

use crate::corpus::{Corpus, Document, Vocabulary};

/// Sliding-window occurrence counts over the whole corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowStats {
    pub window_size: usize,
    /// Total number of windows.
    pub total: u64,
    /// Windows containing each term, by vocabulary index.
    pub term: Vec<u64>,
    /// Windows containing both terms, keyed `(i, j)` with `i < j`.
    pub pair: HashMap<(usize, usize), u64>,
}

impl WindowStats {
    pub fn pair_count(&self, i: usize, j: usize) -> u64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.pair.get(&key).copied().unwrap_or(0)
    }
}

/// Counts windows of `window_size` tokens sliding one token at a time.
///
/// A document of length `L` contributes `max(1, L - window_size + 1)`
/// windows, so documents shorter than the window form one window holding
/// the whole document. Terms and pairs count at most once per window.
pub fn count_windows(corpus: &Corpus, vocab: &Vocabulary, window_size: usize) -> WindowStats {
    assert!(window_size >= 1, "window size must be at least 1");
    let mut stats = WindowStats {
        window_size,
        total: 0,
        term: vec![0; vocab.len()],
        pair: HashMap::new(),
    };
    let mut ids: Vec<usize> = Vec::new();
    for doc in corpus.documents() {
        let tokens = doc_term_ids(doc, vocab);
        let len = tokens.len();
        let n_windows = len.saturating_sub(window_size) + 1;
        for start in 0..n_windows {
            let end = (start + window_size).min(len);
            ids.clear();
            ids.extend_from_slice(&tokens[start..end]);
            ids.sort_unstable();
            ids.dedup();
            stats.total += 1;
            for (a, &i) in ids.iter().enumerate() {
                stats.term[i] += 1;
                for &j in &ids[a + 1..] {
                    *stats.pair.entry((i, j)).or_insert(0) += 1;
                }
            }
        }
    }
    stats
}

pub(crate) fn doc_term_ids(doc: &Document, vocab: &Vocabulary) -> Vec<usize> {
    doc.tokens
        .iter()
        .map(|t| vocab.get(t).expect("vocabulary covers every corpus token"))
        .collect()
}

/// Positive pointwise mutual information of two distinct terms, or `None`
/// when they never share a window or the value is not positive.
pub fn pmi(stats: &WindowStats, i: usize, j: usize) -> Option<f64> {
    debug_assert_ne!(i, j);
    let joint = stats.pair_count(i, j);
    if joint == 0 {
        return None;
    }
    let w = stats.total as f64;
    let p_ij = joint as f64 / w;
    let p_i = stats.term[i] as f64 / w;
    let p_j = stats.term[j] as f64 / w;
    let value = (p_ij / (p_i * p_j)).ln();
    (value > 0.0).then_some(value)
}

/// Inverse document frequency `ln(N / (1 + df))`.
pub fn idf(n_docs: usize, document_frequency: usize) -> f64 {
    (n_docs as f64 / (1 + document_frequency) as f64).ln()
}

/// Raw in-document count times [`idf`], or `None` when the term is absent
/// from the document or the weight is not positive.
pub fn tf_idf(corpus: &Corpus, vocab: &Vocabulary, doc: &Document, term: &str) -> Option<f64> {
    let t = vocab.get(term)?;
    let tf = doc.tokens.iter().filter(|tok| tok.as_str() == term).count();
    tf_idf_weight(tf, corpus.len(), vocab.document_frequency(t))
}

pub(crate) fn tf_idf_weight(tf: usize, n_docs: usize, df: usize) -> Option<f64> {
    if tf == 0 {
        return None;
    }
    let w = tf as f64 * idf(n_docs, df);
    (w > 0.0).then_some(w)
}
