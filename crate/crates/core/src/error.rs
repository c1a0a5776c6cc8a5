use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the chain model, the integrators and the experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration or argument violates a model invariant.
    #[error("invalid configuration: {0}")]
    Invalid(String),

    /// A coordinate became non-finite during integration.
    #[error("trajectory blew up at step {step} (t = {time})")]
    BlowUp { step: u64, time: f64 },

    #[error("bond {bond} does not exist for a chain with {bonds} bonds")]
    InvalidBond { bond: usize, bonds: usize },

    /// The sampled series carries no signal to analyse.
    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// A section run finished without a single return to the section.
    #[error("no section crossings recorded before t = {t_final}")]
    NoCrossings { t_final: f64 },

    /// No event fell within the slice tolerance.
    #[error("slice p{index} = {value} (tol {tolerance}) is empty")]
    EmptySlice {
        index: usize,
        value: f64,
        tolerance: f64,
    },

    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status used by the `simulate` binary.
    ///
    /// 1 for validation and parse failures, 2 for blow-ups, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BlowUp { .. } => 2,
            Error::Io { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
