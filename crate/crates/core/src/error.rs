use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration budget exceeded: {required} sequences required{}, budget is {budget}",
        .curve.as_ref().map(|c| format!(" for curve {c:?}")).unwrap_or_default())]
    BudgetExceeded {
        /// Required sequence count, saturated at `u128::MAX`.
        required: u128,
        budget: u64,
        curve: Option<String>,
    },

    #[error("query has {got} vertices but the index was built for {expected}")]
    QuerySizeMismatch { expected: usize, got: usize },

    #[error("lattice point {0:?} is outside the grid")]
    OutOfBounds(Vec<i64>),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
