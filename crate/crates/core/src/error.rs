use thiserror::Error;

/// Errors produced by counting, testing, model construction and the experiment harness.
#[derive(Debug, Error)]
pub enum GcError {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("enumeration of {required} tuples exceeds the guard of {limit}")]
    Resource { required: f64, limit: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("edge probability Omega[{i}][{j}] = {value} exceeds 1")]
    ModelValidity { i: usize, j: usize, value: f64 },

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("replicate {index}: {source}")]
    Replicate {
        index: u64,
        #[source]
        source: Box<GcError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl GcError {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        GcError::Argument(msg.into())
    }

    /// True for errors caused by parameters that do not define a valid model.
    pub fn is_model_error(&self) -> bool {
        match self {
            GcError::ModelValidity { .. } | GcError::InvalidParams(_) => true,
            GcError::Replicate { source, .. } => source.is_model_error(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, GcError>;
