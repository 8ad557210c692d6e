#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use textgat::corpus::{build_vocabulary, Corpus, Document, Split, TokenMode};
use textgat::graph::{build_graph_with, GraphOptions, TextGraph};
use textgat::layers::{Architecture, EdgeWeighting, FeatureMode, L2Scope, ModelConfig};
use textgat::{DenseMatrix, Rng, SparseMatrix};

pub fn corpus_from(texts: &[&str]) -> Corpus {
    let docs = texts
        .iter()
        .enumerate()
        .map(|(i, t)| Document {
            id: format!("d{i}"),
            raw_text: t.to_string(),
            label: if i % 2 == 0 { "p" } else { "q" }.to_string(),
            split: Split::Train,
            tokens: TokenMode::Word.tokenize(t),
        })
        .collect();
    Corpus::new(TokenMode::Word, docs).unwrap()
}

pub fn lenient(window_size: usize) -> GraphOptions {
    GraphOptions {
        window_size,
        allow_isolated_documents: true,
    }
}

/// The three-document fixture: 3 documents and 4 terms.
pub fn fixture_graph() -> TextGraph {
    let c = corpus_from(&["a b", "a b", "c d"]);
    let v = build_vocabulary(&c).unwrap();
    build_graph_with(&c, &v, &lenient(2)).unwrap()
}

pub fn gat_config(input_dim: usize, classes: usize) -> ModelConfig {
    ModelConfig {
        architecture: Architecture::Gat,
        input_dim,
        hidden_units: 8,
        heads: 8,
        output_heads: 1,
        classes,
        dropout: 0.5,
        leaky_alpha: 0.2,
        l2: 5e-4,
        l2_scope: L2Scope::FirstLayer,
        edge_weighting: EdgeWeighting::MaskOnly,
        feature_mode: FeatureMode::Identity,
    }
}

pub fn gcn_config(input_dim: usize, classes: usize) -> ModelConfig {
    ModelConfig {
        architecture: Architecture::Gcn,
        hidden_units: 16,
        ..gat_config(input_dim, classes)
    }
}

/// Random symmetric adjacency with a unit diagonal and positive weights.
pub fn random_adjacency(n: usize, density: f64, rng: &mut Rng) -> SparseMatrix {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, 1.0));
        for j in i + 1..n {
            if rng.uniform() < density {
                let w = rng.uniform_range(0.1, 3.0);
                t.push((i, j, w));
                t.push((j, i, w));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &t).unwrap()
}

pub fn random_dense(rows: usize, cols: usize, rng: &mut Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.uniform_range(-1.0, 1.0))
}

/// `P A Pᵀ` where new node `i` is old node `perm[i]`.
pub fn permute_adjacency(a: &SparseMatrix, perm: &[usize]) -> SparseMatrix {
    let mut inverse = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inverse[old] = new;
    }
    let t: Vec<(usize, usize, f64)> = a
        .iter()
        .map(|(r, c, v)| (inverse[r], inverse[c], v))
        .collect();
    SparseMatrix::from_triplets(a.rows(), a.cols(), &t).unwrap()
}

/// Random word corpus with at most `max_docs` documents over at most
/// `max_vocab` distinct terms.
pub fn random_corpus(rng: &mut Rng, max_docs: usize, max_vocab: usize) -> Corpus {
    let n_docs = 1 + rng.below(max_docs);
    let vocab = 1 + rng.below(max_vocab);
    let docs = (0..n_docs)
        .map(|i| {
            let len = 1 + rng.below(15);
            let text = (0..len)
                .map(|_| format!("t{}", rng.below(vocab)))
                .collect::<Vec<_>>()
                .join(" ");
            Document {
                id: format!("d{i}"),
                tokens: TokenMode::Word.tokenize(&text),
                raw_text: text,
                label: format!("c{}", rng.below(2)),
                split: Split::Train,
            }
        })
        .collect();
    Corpus::new(TokenMode::Word, docs).unwrap()
}

/// Direct evaluation of the edge-weight definition over all node pairs,
/// independent of the library's window statistics. Node order follows
/// `terms` for the term block. Also returns the documents with no positive
/// document–term weight.
pub fn brute_force_adjacency(
    corpus: &Corpus,
    terms: &[String],
    window_size: usize,
) -> (DenseMatrix, Vec<String>) {
    let docs = corpus.documents();
    let n_docs = docs.len();
    let n = n_docs + terms.len();
    let index: HashMap<&str, usize> = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();

    let mut total = 0u64;
    let mut single: BTreeMap<&str, u64> = BTreeMap::new();
    let mut joint: BTreeMap<(&str, &str), u64> = BTreeMap::new();
    for d in docs {
        let toks: Vec<&str> = d.tokens.iter().map(String::as_str).collect();
        let starts = if toks.len() <= window_size {
            1
        } else {
            toks.len() - window_size + 1
        };
        for s in 0..starts {
            let end = (s + window_size).min(toks.len());
            let set: BTreeSet<&str> = toks[s..end].iter().copied().collect();
            total += 1;
            for &a in &set {
                *single.entry(a).or_default() += 1;
                for &b in &set {
                    if a < b {
                        *joint.entry((a, b)).or_default() += 1;
                    }
                }
            }
        }
    }

    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        m.set(i, i, 1.0);
    }
    let w = total as f64;
    for (&(a, b), &count) in &joint {
        let p_ab = count as f64 / w;
        let p_a = single[a] as f64 / w;
        let p_b = single[b] as f64 / w;
        let pmi = (p_ab / (p_a * p_b)).ln();
        if pmi > 0.0 {
            let (i, j) = (n_docs + index[a], n_docs + index[b]);
            m.set(i, j, pmi);
            m.set(j, i, pmi);
        }
    }

    let mut isolated = Vec::new();
    for (di, d) in docs.iter().enumerate() {
        let mut any = false;
        for term in terms {
            let tf = d.tokens.iter().filter(|t| *t == term).count();
            if tf == 0 {
                continue;
            }
            let df = docs.iter().filter(|o| o.tokens.contains(term)).count();
            let idf = (n_docs as f64 / (1 + df) as f64).ln();
            let weight = tf as f64 * idf;
            if weight > 0.0 {
                let j = n_docs + index[term.as_str()];
                m.set(di, j, weight);
                m.set(j, di, weight);
                any = true;
            }
        }
        if !any {
            isolated.push(d.id.clone());
        }
    }
    (m, isolated)
}

pub fn rng_permutation(n: usize, rng: &mut Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut p);
    p
}
