use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("line {line}: duplicate document id `{id}`")]
    DuplicateId { line: usize, id: String },

    #[error("line {line}: unknown split `{value}` (expected train, val or test)")]
    UnknownSplit { line: usize, value: String },

    #[error("documents left without tokens after preprocessing: {}", .0.join(", "))]
    EmptyDocuments(Vec<String>),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("documents without any positive document-term edge: {}", .0.join(", "))]
    IsolatedDocuments(Vec<String>),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{0} mask selects no nodes")]
    EmptyMask(&'static str),

    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("non-finite loss during gradient check")]
    NonFiniteCheck,

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("backward pass called without a forward cache")]
    MissingCache,

    #[error("class `{class}` has no training documents at label fraction {fraction}")]
    ClassUnrepresented { class: String, fraction: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid {kind} file: {message}")]
    Format { kind: &'static str, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(kind: &'static str, message: impl Into<String>) -> Self {
        Error::Format {
            kind,
            message: message.into(),
        }
    }
}
