use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Pivot magnitude fell below the relative singularity threshold.
    #[error("matrix is numerically singular at pivot {pivot}")]
    Singular { pivot: usize },

    #[error("columns are rank deficient at column {column}")]
    RankDeficient { column: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A witness set failed one of its invariants; `invariant` names it.
    #[error("witness set violates {invariant}: {detail}")]
    Validation {
        invariant: &'static str,
        detail: String,
    },

    #[error("polynomial degenerates: {0}")]
    Degenerate(String),

    #[error("root finder failed to converge (worst residual {worst_residual:e})")]
    RootFailure { worst_residual: f64, residuals: Vec<f64> },

    #[error("{failed} of {total} paths failed (indices {indices:?})")]
    PathFailures {
        failed: usize,
        total: usize,
        indices: Vec<usize>,
    },

    #[error("paths {first} and {second} converged to the same endpoint")]
    PathCrossing { first: usize, second: usize },

    /// Step size control shrank the step below the admissible minimum.
    #[error("step size {step:e} fell below the admissible minimum")]
    StepFailure { step: f64 },

    #[error("path failed: {0}")]
    Path(String),

    #[error("no finite solutions found on the slice")]
    EmptyWitness,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
