use thiserror::Error;

pub type Result<T, E = MrfError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum MrfError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid clique {members:?}: {reason}")]
    InvalidClique { members: Vec<usize>, reason: String },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("model has {num_vars} variables, above the brute-force cap of {cap}; use variable elimination")]
    TooLarge { num_vars: usize, cap: usize },

    #[error("elimination bucket over {bucket_vars} variables needs 2^{bucket_vars} entries, above the table cap of {cap_entries}")]
    WidthExceeded { bucket_vars: usize, cap_entries: usize },

    #[error("distribution is not strictly positive at configuration index {index} (p = {value})")]
    NotPositive { index: usize, value: f64 },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("non-finite objective value at point {point:?}")]
    NumericalFailure { point: Vec<f64> },

    #[error("LAP sub-problem for clique {clique:?} failed: {source}")]
    Subproblem {
        clique: Vec<usize>,
        #[source]
        source: Box<MrfError>,
    },

    #[error("ML baseline is intractable: {source}")]
    Intractable {
        #[source]
        source: Box<MrfError>,
    },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
