use thiserror::Error;

use crate::problem::ParamReport;
use crate::trace::TraceRow;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("step parameters rejected: {0}")]
    InvalidParameters(ParamReport),

    #[error("unsupported problem structure: {0}")]
    UnsupportedStructure(String),

    /// A non-finite iterate appeared. `trace` holds the rows recorded before
    /// the failure.
    #[error("iterates diverged at iteration {iteration}")]
    Diverged {
        iteration: usize,
        trace: Vec<TraceRow>,
    },

    #[error("insufficient data: {usable} usable rows, at least {required} required")]
    InsufficientData { usable: usize, required: usize },
}

impl From<ParamReport> for Error {
    fn from(report: ParamReport) -> Self {
        Error::InvalidParameters(report)
    }
}

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
