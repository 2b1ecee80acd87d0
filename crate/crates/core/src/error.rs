use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid melody `{melody}`: {message}")]
    Validation { melody: String, message: String },

    #[error("unsupported construct `{token}` in kern input: {message}")]
    UnsupportedKern { token: String, message: String },

    #[error("sequence too short: {0}")]
    Length(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("corpus `{corpus}` has {found} usable melodies, need at least {needed}")]
    TooFewMelodies {
        corpus: String,
        needed: usize,
        found: usize,
    },

    #[error("symbol not in declared alphabet: {0}")]
    UnknownSymbol(String),

    #[error("infeasible generation constraint: {0}")]
    Infeasible(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
