use thiserror::Error;

use crate::solver::DegeneracyFlag;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("degenerate correspondences: {reason} (flags: {flags:?})")]
    DegenerateCorrespondence {
        reason: String,
        flags: Vec<DegeneracyFlag>,
    },

    #[error("insufficient feature channels: got {got}, need at least {need}")]
    InsufficientFeatures { got: usize, need: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("resampling exhausted after {attempts} attempts: {what}")]
    ResampleExhausted { attempts: usize, what: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

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
