use std::path::PathBuf;

use crate::data::SubsetIndex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("need more observations than dimensions, got n = {n}, p = {p}")]
    TooFewObservations { n: usize, p: usize },

    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedRow { row: usize, found: usize, expected: usize },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("subset of size {size} cannot support moments in dimension {p} (need at least {})", p + 1)]
    DegenerateSubset { size: usize, p: usize },

    #[error("subset index {index} out of range for {n} observations")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("subset indices must be strictly increasing")]
    UnsortedSubset,

    #[error("scatter matrix is singular")]
    SingularScatter,

    /// A candidate subset that could not produce a usable direction set. The
    /// subset is kept so callers can probe it for an exact fit.
    #[error("degenerate candidate subset of size {}", .0.len())]
    DegenerateCandidate(SubsetIndex),

    #[error("probability {0} must lie strictly inside (0, 1)")]
    InvalidProbability(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("estimation failed: {0}")]
    EstimationFailure(String),

    #[error("outlier index set is empty")]
    EmptyOutlierSet,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
