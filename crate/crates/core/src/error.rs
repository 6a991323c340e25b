use thiserror::Error;

use crate::graph::ValidationReport;

/// Errors produced by the library and surfaced by the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("validation failed: {}", .0.summary())]
    Validation(ValidationReport),

    #[error("kernel is not irreducible; strongly connected components: {components:?}")]
    NotIrreducible { components: Vec<Vec<String>> },

    #[error("measure is not invariant for the kernel (residual {residual:.3e})")]
    MeasureMismatch { residual: f64 },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("chain is not in the span of the basis (residual {residual:.3e})")]
    NotInSpan { residual: f64 },

    #[error("time {t} is not on the sample grid")]
    TimeNotOnGrid { t: f64 },

    #[error("not enough samples: {0}")]
    InsufficientSamples(String),

    #[error("degenerate gaps: {0}")]
    DegenerateGaps(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code: 1 for validation/input problems, 2 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Singular(_)
            | Error::NotPositiveDefinite(_)
            | Error::NotInSpan { .. }
            | Error::DegenerateGaps(_)
            | Error::InsufficientSamples(_) => 2,
            _ => 1,
        }
    }

    /// Short machine-readable tag used in JSON error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidAlgebra(_) => "invalid_algebra",
            Error::InvalidGraph(_) => "invalid_graph",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Validation(_) => "validation",
            Error::NotIrreducible { .. } => "not_irreducible",
            Error::MeasureMismatch { .. } => "measure_mismatch",
            Error::Singular(_) => "singular",
            Error::NotPositiveDefinite(_) => "not_positive_definite",
            Error::NotInSpan { .. } => "not_in_span",
            Error::TimeNotOnGrid { .. } => "time_not_on_grid",
            Error::InsufficientSamples(_) => "insufficient_samples",
            Error::DegenerateGaps(_) => "degenerate_gaps",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
