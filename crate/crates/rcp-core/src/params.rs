//! Protocol parameters and the fluid-model equilibrium.
//!
//! The congestion-control loop under study updates a single fair rate per
//! bottleneck link. In the fluid limit, with every source seeing the same
//! round-trip time `tau`, the closed loop is the pair of delay
//! differential equations
//!
//! ```text
//!   dR/dt = kappa * R(t) / (C * tau) * ( a * (C - R(t - tau)) - beta * q(t) / tau )
//!   dq/dt = kappa * ( R(t - tau) - C )
//! ```
//!
//! where `R` is the rate the link asks each flow aggregate to use, `q` is
//! the queue backlog at the link, `C` is the link capacity, `a` and `beta`
//! are the rate-mismatch and queue-drain gains, and `kappa` is an overall
//! loop gain. (In the non-negative-queue variant the `dq/dt` term is
//! clamped so the backlog never goes below zero; that only matters away
//! from equilibrium and is handled by the simulator.)
//!
//! The unique equilibrium matches rate to capacity and empties the queue:
//! `R* = C`, `q* = 0`, for every `kappa > 0`.

use crate::error::Result;
use crate::numeric::{require_non_negative, require_positive};

/// Parameters of one link/protocol configuration.
///
/// Constructed via [`ProtocolParams::new`] (which defaults `kappa` to 1)
/// and optionally [`ProtocolParams::with_kappa`]. Most analyses take the
/// raw struct and validate internally; [`validate_params`] returns a
/// [`ValidatedParams`] witness for call sites that want to validate once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    /// Rate-mismatch gain (dimensionless), `a > 0`.
    pub a: f64,
    /// Queue-drain gain (dimensionless), `beta >= 0`. `beta = 0` removes
    /// queue feedback and reduces the loop to a scalar delay equation.
    pub beta: f64,
    /// Link capacity `C > 0` (e.g. packets per unit time).
    pub cap: f64,
    /// Round-trip time `tau > 0`.
    pub tau: f64,
    /// Loop gain `kappa > 0`; the nominal protocol runs at `kappa = 1`.
    pub kappa: f64,
}

impl ProtocolParams {
    /// Creates a parameter set with the nominal loop gain `kappa = 1`.
    pub fn new(a: f64, beta: f64, cap: f64, tau: f64) -> Self {
        ProtocolParams {
            a,
            beta,
            cap,
            tau,
            kappa: 1.0,
        }
    }

    /// Returns the same parameters with a different loop gain.
    pub fn with_kappa(self, kappa: f64) -> Self {
        ProtocolParams { kappa, ..self }
    }
}

/// Witness that a [`ProtocolParams`] has passed [`validate_params`].
///
/// Dereferences to the underlying parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedParams(ProtocolParams);

impl std::ops::Deref for ValidatedParams {
    type Target = ProtocolParams;

    fn deref(&self) -> &ProtocolParams {
        &self.0
    }
}

impl ValidatedParams {
    /// Returns the validated parameters by value.
    pub fn into_inner(self) -> ProtocolParams {
        self.0
    }
}

/// Validates a parameter set, returning a typed witness.
///
/// Checks `a > 0`, `beta >= 0`, `cap > 0`, `tau > 0`, `kappa > 0`, all
/// finite. The returned [`Error::Domain`](crate::Error::Domain) names the
/// offending field.
pub fn validate_params(p: &ProtocolParams) -> Result<ValidatedParams> {
    require_positive("a", p.a)?;
    require_non_negative("beta", p.beta)?;
    require_positive("cap", p.cap)?;
    require_positive("tau", p.tau)?;
    require_positive("kappa", p.kappa)?;
    Ok(ValidatedParams(*p))
}

/// The fluid-model fixed point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    /// Equilibrium rate; equals the link capacity.
    pub r_star: f64,
    /// Equilibrium queue backlog; always zero.
    pub q_star: f64,
}

/// Returns the unique equilibrium `(R*, q*) = (C, 0)`.
///
/// The fixed point does not depend on the loop gain `kappa`: `dq/dt = 0`
/// forces `R* = C`, and `dR/dt = 0` at `R* = C` then forces `q* = 0`.
pub fn equilibrium(p: &ValidatedParams) -> Equilibrium {
    Equilibrium {
        r_star: p.cap,
        q_star: 0.0,
    }
}
