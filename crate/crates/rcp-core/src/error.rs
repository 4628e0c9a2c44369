//! Error types shared across the crate.
//!
//! Errors fall into four groups:
//!
//! - [`Error::Domain`] / [`Error::Config`] — the caller passed a value
//!   outside an operation's domain (a non-positive gain, a slot that does
//!   not divide the RTT, …). The offending field is always named.
//! - [`Error::Inconclusive`] — a trajectory or trace analysis could not
//!   reach a verdict at the requested horizon (amplitude still trending).
//! - [`Error::Convergence`] — an iterative root search failed to reach its
//!   residual target.
//! - [`Error::Internal`] — an algebraic identity that must hold by
//!   construction was violated (e.g. the two computation paths for the
//!   first Lyapunov coefficient disagree). Always a bug, never user error.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside the operation's domain. `field` names the
    /// offending parameter.
    #[error("invalid parameter `{field}`: {reason}")]
    Domain {
        /// Name of the offending parameter.
        field: String,
        /// Human-readable description of the violation.
        reason: String,
    },

    /// A simulator configuration violates an invariant. `field` names the
    /// offending entry.
    #[error("invalid configuration `{field}`: {reason}")]
    Config {
        /// Name of the offending configuration entry.
        field: String,
        /// Human-readable description of the violation.
        reason: String,
    },

    /// An analysis could not reach a verdict (for example, the oscillation
    /// amplitude is still trending at the end of the horizon).
    #[error("inconclusive: {0}")]
    Inconclusive(String),

    /// An iterative numerical method failed to converge to its target
    /// accuracy.
    #[error("numerical convergence failure: {0}")]
    Convergence(String),

    /// An internal consistency check failed; this indicates a bug in the
    /// crate, not a user error.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Convenience constructor for [`Error::Domain`].
    pub fn domain(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Domain {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Convenience constructor for [`Error::Config`].
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
