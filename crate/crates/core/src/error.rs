use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent physical configuration (e.g. CSA requested with d = 0).
    #[error("configuration error: {0}")]
    Config(String),

    /// Numerical failure: non-finite values, non-convergence, singular bases.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Caller misuse such as mismatched grids or dimensions.
    #[error("usage error: {0}")]
    Usage(String),

    /// An operation refused because the spectrum is (nearly) defective.
    #[error("degenerate spectrum: {0}")]
    Degenerate(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
