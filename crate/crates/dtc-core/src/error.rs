use thiserror::Error;

/// Errors raised by the factorization and clustering pipeline.
#[derive(Debug, Error)]
pub enum DtcError {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("mode index {mode} out of range for order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vector is numerically zero and cannot be normalized")]
    DegenerateVector,

    #[error("truth factor set reconstructs to the zero tensor")]
    ZeroTruth,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed tensor file: {0}")]
    MalformedFile(String),

    #[error("truncated tensor file payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("ragged csv: row {row} has {found} fields, expected {expected}")]
    RaggedCsv {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("csv parse error at row {row}, column {col}: {value:?}")]
    CsvParse { row: usize, col: usize, value: String },
}

pub type Result<T> = std::result::Result<T, DtcError>;
