use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A value outside an operation's domain (bad membership argument,
    /// unnormalized weight vector, unknown class index, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Dataset loading or encoding failure. `row`/`column` are 1-based
    /// positions in the source file when known.
    #[error("data error{}: {message}", location(.row, .column))]
    Data {
        message: String,
        row: Option<usize>,
        column: Option<usize>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn location(row: &Option<usize>, column: &Option<usize>) -> String {
    match (row, column) {
        (Some(r), Some(c)) => format!(" at row {r}, column {c}"),
        (Some(r), None) => format!(" at row {r}"),
        (None, Some(c)) => format!(" in column {c}"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data {
            message: msg.into(),
            row: None,
            column: None,
        }
    }

    pub(crate) fn data_at(msg: impl Into<String>, row: Option<usize>, column: Option<usize>) -> Self {
        Error::Data {
            message: msg.into(),
            row,
            column,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
