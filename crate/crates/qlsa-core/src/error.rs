//! Error type shared by all modules.

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A matrix argument exceeds the admissible operator norm.
    #[error("norm error: operator norm {norm} exceeds {limit}")]
    Norm { norm: f64, limit: f64 },
    /// The coefficient matrix failed the invertibility check.
    #[error("singular system: smallest singular value {sigma_min:e} vs largest {sigma_max:e}")]
    Singular { sigma_min: f64, sigma_max: f64 },
    /// The nullspace of H(s) does not have the expected dimension.
    #[error("structure error: nullspace dimension {found}, expected 2")]
    Structure { found: usize },
    /// A problem description could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
    /// The embedded dimension exceeds the desk-scale cap.
    #[error("resource cap: embedded dimension {dim} exceeds {cap}")]
    ResourceCap { dim: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
