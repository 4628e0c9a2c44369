//! Analysis and simulation of a rate-control loop with queue feedback.
//!
//! A bottleneck link serving many flows announces a single fair rate `R`
//! and adjusts it from two error signals measured at the link: the
//! mismatch between arriving traffic and capacity `C`, and the queue
//! backlog `q`. With a common round-trip time `tau`, the fluid limit of
//! the loop is the delay system
//!
//! ```text
//!   dR/dt = kappa R / (C tau) * ( a (C - R(t - tau)) - beta q / tau )
//!   dq/dt = kappa ( R(t - tau) - C )
//! ```
//!
//! This crate answers, for that system:
//!
//! - **Where is it stable?** Closed-form stability region in the gains
//!   `(a, beta, kappa)`, and the Hopf threshold `kappa_c` where a root
//!   pair crosses the imaginary axis ([`stability`]).
//! - **How fast does it settle?** The exponential decay rate of
//!   perturbations, via closed-form branch analysis for the rate-only
//!   loop and via the rightmost characteristic root in general
//!   ([`convergence`]).
//! - **What happens past the threshold?** The type of the Hopf
//!   bifurcation — whether crossing `kappa_c` sheds a stable small
//!   oscillation or destroys a fragile equilibrium — through the first
//!   Lyapunov coefficient and the derived amplitude/criticality
//!   quantities ([`hopf`]).
//! - **Does the fluid picture survive discretisation?** A fluid
//!   integrator for the nonlinear delay system ([`fluid`]) and a slotted
//!   packet-level simulator with a finite feedback delay and discrete
//!   rate updates ([`packet`]).
//!
//! Numerical results that admit two routes (spectral vs. closed form,
//! fluid vs. linear theory) are always computed both ways and
//! cross-checked; see the integration tests and the [`acceptance`]
//! checklist.

pub mod acceptance;
mod colloc;
pub mod convergence;
mod error;
pub mod fluid;
pub mod hopf;
mod lambert;
mod numeric;
pub mod packet;
pub mod params;
pub mod report;
pub mod stability;

pub use error::{Error, Result};
pub use params::{equilibrium, validate_params, Equilibrium, ProtocolParams, ValidatedParams};

/// Complex scalar used throughout the public API (roots, Hopf
/// coefficients), re-exported so downstream code and tests name the
/// exact type this crate was built against.
pub use num_complex::Complex64;
