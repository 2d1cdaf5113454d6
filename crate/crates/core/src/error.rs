use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("format error at byte offset {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("voxel {voxel} is not SPD (smallest eigenvalue {min_eigenvalue:e})")]
    NotSpd { voxel: usize, min_eigenvalue: f64 },

    #[error("near-singular matrix (smallest eigenvalue {min_eigenvalue:e})")]
    NearSingular { min_eigenvalue: f64 },

    #[error("flow integration failed: {0}")]
    Integration(String),

    #[error("line search failed: no sufficient decrease after {backtracks} backtracks")]
    LineSearch { backtracks: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Coarse classification used by front ends to pick exit codes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) | Error::Precondition(_) => ErrorKind::Argument,
            Error::GridMismatch(_) | Error::Format { .. } | Error::Io(_) | Error::NotSpd { .. } => {
                ErrorKind::Data
            }
            Error::NearSingular { .. } | Error::Integration(_) | Error::LineSearch { .. } => {
                ErrorKind::Numerical
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Argument,
    Data,
    Numerical,
}

pub type Result<T> = std::result::Result<T, Error>;
