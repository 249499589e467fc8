use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("index {index} out of bounds for length {len}")]
    Index { index: usize, len: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty minibatch")]
    EmptyBatch,

    #[error("training diverged at epoch {epoch}: {message}")]
    Training { epoch: usize, message: String },

    #[error("layer {layer}: {source}")]
    Layer {
        layer: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("SMO did not converge after {iterations} iterations ({violations} KKT violations remain)")]
    Convergence { iterations: usize, violations: usize },

    #[error("data error: {0}")]
    Data(String),

    #[error("bad magic number: expected {expected}, found {found}")]
    Format { expected: u32, found: u32 },

    #[error("truncated input: expected {expected} bytes, found {found}")]
    Length { expected: usize, found: usize },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("gradient check failed: {0}")]
    GradCheck(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag used in error documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension { .. } => "dimension",
            Error::Index { .. } => "index",
            Error::Config(_) => "config",
            Error::Domain(_) => "domain",
            Error::EmptyBatch => "empty_batch",
            Error::Training { .. } => "training",
            Error::Layer { source, .. } => source.kind(),
            Error::Convergence { .. } => "convergence",
            Error::Data(_) => "data",
            Error::Format { .. } => "format",
            Error::Length { .. } => "length",
            Error::Shape(_) => "shape",
            Error::GradCheck(_) => "gradcheck",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension {
            context,
            expected,
            found,
        })
    }
}
