//! Error taxonomy shared by every module.
//!
//! Three failure classes are distinguished so callers (and the CLI exit-code
//! mapping) can react appropriately:
//!
//! * [`Error::Domain`] — a mathematical precondition was violated (order out
//!   of range, index outside an admissible window, …);
//! * [`Error::Structural`] — inputs are structurally incompatible (grid
//!   mismatch, wrong storage layout, non-power-of-two length, …);
//! * [`Error::Numerical`] — a computation ran but failed its own accuracy or
//!   convergence contract (quadrature tolerance missed, contraction factor
//!   not below threshold, …).

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A mathematical precondition on an argument was violated.
    #[error("domain error: {0}")]
    Domain(String),
    /// Inputs are structurally incompatible with the operation.
    #[error("structural error: {0}")]
    Structural(String),
    /// The computation could not meet its accuracy/convergence contract.
    #[error("numerical error: {0}")]
    Numerical(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
