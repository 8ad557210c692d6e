//! Seeded workloads shared by the benchmarks.

use textgat::corpus::{build_vocabulary, TokenMode};
use textgat::graph::{build_graph_with, GraphOptions};
use textgat::synth::SynthParams;
use textgat::{Corpus, TextGraph};

/// The default synthetic corpus scaled to `docs_per_class` documents per class.
pub fn corpus(docs_per_class: usize) -> Corpus {
    SynthParams {
        docs_per_class,
        ..SynthParams::default()
    }
    .corpus(TokenMode::Word)
    .expect("synthetic parameters are valid")
}

pub fn graph(corpus: &Corpus, window_size: usize) -> TextGraph {
    let vocab = build_vocabulary(corpus).expect("non-empty corpus");
    let opts = GraphOptions {
        window_size,
        allow_isolated_documents: false,
    };
    build_graph_with(corpus, &vocab, &opts).expect("synthetic documents share terms")
}
