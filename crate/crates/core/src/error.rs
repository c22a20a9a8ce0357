use thiserror::Error;

pub type Result<T> = std::result::Result<T, CssError>;

#[derive(Debug, Error)]
pub enum CssError {
    #[error("matrix must have at least one row and one column (got {rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid column set: {0}")]
    InvalidColumns(String),

    #[error("columns {indices:?} are numerically dependent on the rest of the basis")]
    DegenerateBasis { indices: Vec<usize> },

    #[error("invalid rank {k}: must satisfy 1 <= k <= {max}")]
    InvalidRank { k: usize, max: usize },

    #[error("no column has non-negligible energy")]
    NoActiveCandidates,

    #[error("all candidate columns have been exhausted")]
    Exhausted,

    #[error("column {index} is numerically dependent on the selected columns")]
    NumericallyDependent { index: usize },

    #[error("partitioning error: {0}")]
    Partition(String),

    #[error("tiling error: {0}")]
    Tiling(String),

    #[error("relative accuracy is undefined: uniform baseline is already within tolerance of the optimum")]
    UndefinedMetric,

    #[error("sampling distribution has zero total mass")]
    DegenerateDistribution,

    #[error("oracle limited to at most 64x64 inputs (got {rows}x{cols})")]
    OracleScale { rows: usize, cols: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("entry ({row}, {col}) out of bounds for a {rows}x{cols} matrix (line {line})")]
    Bounds {
        line: usize,
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CssError {
    /// True for failures caused by the numbers themselves rather than malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            CssError::DegenerateBasis { .. }
                | CssError::NoActiveCandidates
                | CssError::Exhausted
                | CssError::NumericallyDependent { .. }
                | CssError::UndefinedMetric
                | CssError::DegenerateDistribution
        )
    }
}
