//! Transductive text classification over a heterogeneous document/term
//! graph.
//!
//! The pipeline runs in five stages, one module each:
//!
//! - [`corpus`]: JSON-lines ingestion, char/word tokenization, stopword
//!   and special-token removal, vocabulary and corpus statistics.
//! - [`graph`]: one graph whose nodes are documents and terms, with
//!   positive-PMI term–term edges, positive TF-IDF document–term edges and
//!   unit self-loops.
//! - [`layers`]: masked multi-head graph attention and a graph convolution
//!   baseline, each with hand-written backward passes.
//! - [`train`]: full-batch Adam with early stopping and bit-reproducible
//!   checkpoints.
//! - [`eval`]: confusion matrices, per-class and macro metrics, and the
//!   head-count, label-fraction and tokenization ablations.
//!
//! [`numcore`] holds the matrix types and the finite-difference gradient
//! checker every backward pass is tested against.

mod codec;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod graph;
pub mod layers;
pub mod numcore;
pub mod synth;
pub mod train;

pub use corpus::{Corpus, CorpusStats, Document, Split, TokenMode, Vocabulary};
pub use error::{Error, Result};
pub use eval::{ConfusionMatrix, MetricsReport};
pub use graph::{NormalizedAdjacency, TextGraph, WindowStats};
pub use layers::{ModelConfig, ModelParams};
pub use numcore::{DenseMatrix, Rng, SparseMatrix};
pub use train::{Checkpoint, RunLog, TrainConfig};
