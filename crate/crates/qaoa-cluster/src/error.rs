//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Variants are grouped by
//! failure class rather than by module: argument validation, capacity
//! guards, numeric breakdown, parsing, and I/O. The CLI maps these onto
//! exit codes (configuration problems exit 2, runtime failures exit 3).

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A bit string (or label vector) does not match the expected width.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// A problem size exceeds a hard capacity guard (statevector memory,
    /// brute-force enumeration).
    #[error("{what}: requested size {requested} exceeds capacity {max}")]
    CapacityExceeded {
        what: &'static str,
        requested: usize,
        max: usize,
    },

    /// Malformed graph data: out-of-range endpoint, duplicate edge,
    /// negative weight, self-loop.
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    /// A scalar or structured argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A probability vector or distribution failed normalization checks.
    #[error("distribution not normalized: total mass {total}")]
    NotNormalized { total: f64 },

    /// Order-statistic rank outside 1..=N.
    #[error("order statistic rank {rank} out of range 1..={n}")]
    RankOutOfRange { rank: usize, n: usize },

    /// The Gram matrix could not be factorized (degenerate or non-SPD).
    #[error("gram matrix factorization failed: {0}")]
    DegenerateGram(String),

    /// The black-box objective failed during optimization.
    #[error("objective evaluation failed at step {step}: {source}")]
    ObjectiveFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    /// Gate-program text that could not be parsed; line numbers are 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Experiment configuration problems, one message per offending field.
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Shorthand for [`Error::InvalidArgument`].
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors that indicate bad user input (config, file contents,
    /// argument validation) as opposed to runtime failures.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::LengthMismatch { .. }
                | Error::InvalidGraph(_)
                | Error::InvalidArgument(_)
                | Error::RankOutOfRange { .. }
                | Error::Parse { .. }
                | Error::Config(_)
        )
    }
}
