//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed to reach its tolerance. Carries the
    /// best available estimate and the error bound that was achieved.
    #[error("numerical error: {context} (achieved {achieved:.3e}, wanted {wanted:.3e})")]
    Numerical {
        context: String,
        achieved: f64,
        wanted: f64,
    },

    /// Invalid configuration (grid sizes, proposal widths, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A precondition linking two arguments is violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Peak search on a field without an isolated maximum.
    #[error("degenerate peak: {0}")]
    DegeneratePeak(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
