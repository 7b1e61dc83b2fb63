use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("index {index} out of range for {len} qubits")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("kernel matrix is singular (condition estimate {condition:.3e}) after ridge ladder")]
    SingularKernel { condition: f64 },

    #[error("non-positive pivot {pivot:.3e} at row {row} in Cholesky factorization")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("training diverged at step {step}: loss {loss} (learning rate too large?)")]
    Diverged { step: usize, loss: f64 },

    #[error("undefined quantity: {0}")]
    Undefined(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn dim(expected: usize, got: usize) -> Self {
        Error::Dimension { expected, got }
    }

    /// Short machine-readable tag used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension { .. } => "dimension",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::SingularKernel { .. } => "singular_kernel",
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::Diverged { .. } => "diverged",
            Error::Undefined(_) => "undefined",
            Error::Parse(_) => "parse",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }
}
