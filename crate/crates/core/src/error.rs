use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch on {axis}: expected {expected}, got {got}")]
    DimensionMismatch {
        axis: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite entry at ({row}, {col}) in {what}")]
    NonFinite {
        what: &'static str,
        row: usize,
        col: usize,
    },

    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("LP solver failure after {iterations} pivots: {detail}")]
    SolverFailure { iterations: usize, detail: String },

    #[error("degenerate fit in {stage}: {detail} ({trace_len} scale probes)")]
    DegenerateFit {
        stage: &'static str,
        detail: String,
        trace_len: usize,
    },

    #[error("degenerate statistic: residual scale is zero")]
    DegenerateStatistic,

    #[error("csv error at line {line}, column {col} of {path}: {detail}")]
    Csv {
        path: String,
        line: usize,
        col: usize,
        detail: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("experiment aborted: {0}")]
    Experiment(String),
}
