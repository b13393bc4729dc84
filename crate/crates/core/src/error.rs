use thiserror::Error;

/// Crate-wide error. Every variant names the module and operation that failed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry::{op}: {msg}")]
    Geometry { op: &'static str, msg: String },

    #[error("nonlinearity::{op}: {msg}")]
    Nonlinearity { op: &'static str, msg: String },

    #[error("fdsolver::{op}: {msg}")]
    Solver { op: &'static str, msg: String },

    #[error("radial::{op}: {msg}")]
    Radial { op: &'static str, msg: String },

    #[error("analysis::{op}: {msg}")]
    Analysis { op: &'static str, msg: String },

    #[error("stochastic::{op}: {msg}")]
    Stochastic { op: &'static str, msg: String },

    #[error("rearrange::{op}: {msg}")]
    Rearrange { op: &'static str, msg: String },

    #[error("cli::{op}: {msg}")]
    Config { op: &'static str, msg: String },

    #[error("io::{op}: {msg}")]
    Format { op: &'static str, msg: String },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by invalid input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Geometry { .. }
                | Error::Nonlinearity { .. }
                | Error::Config { .. }
                | Error::Format { .. }
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! bail {
    ($variant:ident, $op:expr, $($arg:tt)*) => {
        return Err($crate::error::Error::$variant { op: $op, msg: format!($($arg)*) })
    };
}
pub(crate) use bail;
