use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("empty matrix")]
    EmptyMatrix,

    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    /// A primal point sits on (or outside) the boundary where an interior point is needed.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("bisection could not bracket the multiplier: {0}")]
    BracketFailure(String),

    #[error("integrator step size underflow at t = {t:e}")]
    StepUnderflow { t: f64 },

    #[error("error did not decrease under step refinement: {0}")]
    Inconsistent(String),

    /// Failure inside an iterative solver, tagged with the iteration that produced it.
    #[error("iteration {k}: {source}")]
    AtIteration {
        k: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite {quantity} at iteration {k}")]
    NonFinite { k: usize, quantity: &'static str },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("plot error: {0}")]
    Plot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at(self, k: usize) -> Error {
        match self {
            e @ Error::AtIteration { .. } => e,
            e => Error::AtIteration {
                k,
                source: Box::new(e),
            },
        }
    }

    /// True for failures of the numerics rather than of the inputs or the filesystem.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::AtIteration { source, .. } => source.is_numerical(),
            Error::NoConvergence { .. }
            | Error::BracketFailure(_)
            | Error::StepUnderflow { .. }
            | Error::Inconsistent(_)
            | Error::NonFinite { .. }
            | Error::Domain(_) => true,
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
