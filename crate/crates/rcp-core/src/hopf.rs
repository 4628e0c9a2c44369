//! Poincaré normal form of the Hopf bifurcation at `kappa = kappa_c`:
//! first Lyapunov coefficient, criticality, and the derived amplitude
//! and stability quantities.
//!
//! At `kappa_c` a conjugate pair crosses the imaginary axis at
//! `omega_0 = kappa_c theta / tau`; writing `Theta = omega_0 tau`, the
//! crossing point satisfies the surface identities
//!
//! ```text
//!   kappa_c a      = Theta sin(Theta)
//!   kappa_c^2 beta = Theta^2 cos(Theta)
//! ```
//!
//! so the nominal-gain (`kappa = 1`) bifurcation set is the curve
//! `(a, beta) = (Theta sin Theta, Theta^2 cos Theta)`, `Theta in
//! (0, pi/2)`. Projecting the delay system onto its centre manifold at
//! the crossing gives the normal-form coefficients `g20, g11, g02, g21`
//! and from them the first Lyapunov coefficient
//!
//! ```text
//!   c1(0) = i (g20 g11 - 2 |g11|^2 - |g02|^2 / 3) / (2 omega_0)
//!           + g21 / 2
//! ```
//!
//! which collapses, after substituting the eigenvector data, to the
//! compact product
//!
//! ```text
//!   c1(0) = -i conj(Omega) omega_0 A2 / (C^2 A1)
//! ```
//!
//! with `A1 = 4 tau^2 + kappa q02^2 (beta + 2 i a omega_0 tau)` and
//! `A2 = A1 - 2 tau^2`. The sign of `Re c1` decides everything:
//!
//! - `Re c1 > 0` (`Theta < Theta_h ~ 1.1297161`): **sub-critical** — an
//!   unstable small orbit exists on the stable side; crossing the
//!   threshold is abrupt.
//! - `Re c1 < 0` (`Theta > Theta_h`): **super-critical** — a stable
//!   small orbit grows continuously past the threshold.
//!
//! The module computes `c1` along two fully independent routes — the
//! closed forms, and the raw centre-manifold pipeline including the
//! second-order manifold coefficients `w20`, `w11` — and refuses to
//! return a value if they disagree.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::{bisect, require_non_negative, require_positive};
use crate::stability::{hopf_kappa_c, theta};

/// Agreement required between the two `c1` computation routes.
const CROSS_CHECK_TOL: f64 = 1e-8;
/// Tolerance on `|kappa - kappa_c|` for on-surface queries.
const SURFACE_TOL: f64 = 1e-6;

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// Which side of the bifurcation the periodic orbit lives on, and with
/// what stability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criticality {
    /// `mu2 < 0`: an unstable orbit coexists with the stable equilibrium
    /// below the threshold (`Re c1 > 0`).
    SubCritical,
    /// `mu2 > 0`: a stable orbit appears beyond the threshold
    /// (`Re c1 < 0`).
    SuperCritical,
}

impl fmt::Display for Criticality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criticality::SubCritical => write!(f, "sub_critical"),
            Criticality::SuperCritical => write!(f, "super_critical"),
        }
    }
}

/// Centre-manifold data behind a [`HopfReport`], exposed for inspection
/// and cross-checking. All values are taken on the nominal (`kappa = 1`)
/// bifurcation surface at the report's `Theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfIntermediates {
    /// Eigenvector normalisation constant `Omega` (the adjoint pairing
    /// `<q*, q>` is scaled to 1).
    pub normalization: Complex64,
    /// Second component of the right eigenvector `q0 = (1, q02)`.
    pub q02: Complex64,
    /// Quadratic normal-form coefficient of `z^2`.
    pub g20: Complex64,
    /// Quadratic coefficient of `z zbar`; vanishes identically for this
    /// system, so its computed size is a pipeline health check.
    pub g11: Complex64,
    /// Quadratic coefficient of `zbar^2`.
    pub g02: Complex64,
    /// Cubic coefficient of `z^2 zbar`, from the `w`-terms.
    pub g21: Complex64,
    /// Particular-solution vector of the `w20` equation.
    pub e: [Complex64; 2],
    /// Particular-solution vector of the `w11` equation; zero here.
    pub f: [Complex64; 2],
    /// `4 tau^2 + kappa q02^2 (beta + 2 i a omega0 tau)`.
    pub a1: Complex64,
    /// `A1 - 2 tau^2`.
    pub a2: Complex64,
    /// Second-order manifold coefficient `w20` evaluated at `theta = 0`.
    pub w20_at_zero: [Complex64; 2],
    /// `w20` evaluated at `theta = -tau`.
    pub w20_at_minus_tau: [Complex64; 2],
    /// `w11`, constant in `theta` (equal to `f`).
    pub w11: [Complex64; 2],
}

/// Normal-form summary of the Hopf bifurcation for one parameter pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfReport {
    /// Crossing frequency `omega_0 = kappa_c theta / tau`.
    pub omega0: f64,
    /// Delay-normalised crossing angle `Theta = omega_0 tau`.
    pub theta: f64,
    /// First Lyapunov coefficient `c1(0)` on the `kappa = 1` surface at
    /// this `Theta`.
    pub c1: Complex64,
    /// Crossing speed `alpha'(0) = d Re(lambda) / d kappa > 0` (scaled
    /// form; see [`alpha_prime`]).
    pub alpha_prime: f64,
    /// Direction coefficient `mu2 = -Re c1 / alpha'`; the orbit exists
    /// where `mu2 (kappa - kappa_c) > 0`.
    pub mu2: f64,
    /// Orbit stability coefficient `beta2 = 2 Re c1`; negative means the
    /// orbit is stable.
    pub beta2: f64,
    /// Sub- or super-critical, decided by the sign of `mu2`.
    pub classification: Criticality,
    /// The centre-manifold data the coefficients came from.
    pub intermediates: HopfIntermediates,
}

/// Crossing frequency `omega_0` for parameters on the Hopf surface.
///
/// `kappa` must match the critical gain for `(a, beta)` to within
/// `1e-6`; passing an off-surface gain is a domain error naming `kappa`.
pub fn omega0_at_hopf(a: f64, beta: f64, kappa: f64, tau: f64) -> Result<f64> {
    require_positive("kappa", kappa)?;
    require_positive("tau", tau)?;
    let th = theta(a, beta)?;
    let kappa_c = hopf_kappa_c(a, beta)?;
    if (kappa - kappa_c).abs() > SURFACE_TOL {
        return Err(Error::domain(
            "kappa",
            format!("not on the Hopf surface: got {kappa}, critical gain is {kappa_c}"),
        ));
    }
    Ok(kappa_c * th.theta / tau)
}

/// `Re c1` from the trigonometric closed form, at `C = tau = 1`.
///
/// Numerator and denominators are exactly the expanded form of
/// `Re(-i conj(Omega) omega_0 A2 / A1)` on the `kappa = 1` surface.
fn printed_re_c1(th: f64) -> f64 {
    let d1 = {
        let re = 8.0 * (3.0 * th).cos() - 3.0 * (2.0 * th).cos() + 1.0;
        let im = 8.0 * (3.0 * th).sin() - 3.0 * (2.0 * th).sin();
        re * re + im * im
    };
    let d2 = {
        let re = 3.0 + (2.0 * th).cos();
        let im = 2.0 * th - (2.0 * th).sin();
        re * re + im * im
    };
    let n = 4.0 * (5.0 * th).sin() - 3.0 * (4.0 * th).sin() - 24.0 * (3.0 * th).sin()
        + 42.0 * (2.0 * th).sin()
        + 4.0 * th.sin()
        - 12.0 * th * (2.0 * (3.0 * th).cos() - (2.0 * th).cos() - 6.0 * th.cos() + 7.0);
    2.0 * th / d1 * (1.0 / d2) * n
}

/// Everything the centre-manifold projection produces at one surface
/// point, plus `c1` both ways.
struct SurfaceData {
    intermediates: HopfIntermediates,
    /// `c1` assembled from the raw pipeline (g-coefficients + w-terms).
    c1_pipeline: Complex64,
    /// `c1` from the compact product `-i conj(Omega) omega0 A2 /
    /// (C^2 A1)`.
    c1_compact: Complex64,
}

/// Runs the centre-manifold projection at the `kappa = 1` surface point
/// of angle `th`, with capacity `cap` and delay `tau`.
fn surface_data(th: f64, cap: f64, tau: f64) -> SurfaceData {
    let kappa = 1.0;
    let a = th * th.sin() / kappa;
    let beta = th * th * th.cos() / (kappa * kappa);
    let w0 = th / tau;
    let c = cap;

    // Right eigenvector (1, q02) of the linearisation at +i omega_0.
    let q02 = -i() * w0 * tau * tau / (kappa * beta + i() * a * w0 * tau);
    // Adjoint normalisation <q*, q> = 1.
    let omega =
        (Complex64::new(1.0, -w0 * tau) + kappa * beta / (kappa * beta - i() * a * w0 * tau)).inv();
    let omega_bar = omega.conj();
    let ew = (-i() * w0 * tau).exp(); // e^{-i omega0 tau}

    // Quadratic coefficients straight from the projected nonlinearity.
    let g20 = -2.0 * omega_bar * kappa * (a / (c * tau) * ew + beta / (c * tau * tau) * q02);
    let g11 = -omega_bar
        * kappa
        * (a / (c * tau) * (ew.inv() + ew) + beta / (c * tau * tau) * (q02.conj() + q02));
    let g02 =
        -2.0 * omega_bar * kappa * (a / (c * tau) * ew.inv() + beta / (c * tau * tau) * q02.conj());

    let a1 = 4.0 * tau * tau + kappa * q02 * q02 * (beta + 2.0 * i() * a * w0 * tau);
    let a2 = 2.0 * tau * tau + kappa * q02 * q02 * (beta + 2.0 * i() * a * w0 * tau);
    // Particular solution of the w20 two-point problem.
    let e_scale = 2.0 * tau * tau / (c * a1);
    let e = [e_scale * 2.0, e_scale * i() * w0 * q02 * q02];
    // The w11 problem is homogeneous (g11 = 0): f = 0.
    let f = [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];

    let q0 = [Complex64::new(1.0, 0.0), q02];
    let w20 = |th_arg: f64| -> [Complex64; 2] {
        let osc = (i() * w0 * th_arg).exp();
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for k in 0..2 {
            out[k] = (-g20 / (i() * w0)) * q0[k] * osc
                - (g02.conj() / (3.0 * i() * w0)) * q0[k].conj() * osc.inv()
                + e[k] * osc * osc;
        }
        out
    };
    let w20_at_zero = w20(0.0);
    let w20_at_minus_tau = w20(-tau);
    let w11 = f;

    // Cubic coefficient from the second-order manifold terms.
    let g21 = -(omega_bar / (c * tau))
        * (i() * w0 * tau * w20_at_zero[0]
            + kappa * a * w20_at_minus_tau[0]
            + kappa * beta * w20_at_zero[1] / tau
            - 2.0 * i() * w0 * tau * w11[0]
            + 2.0 * kappa * a * w11[0]
            + 2.0 * kappa * beta * w11[1] / tau);

    let c1_pipeline =
        i() / (2.0 * w0) * (g20 * g11 - 2.0 * g11.norm_sqr() - g02.norm_sqr() / 3.0) + g21 / 2.0;
    let c1_compact = -i() * omega_bar * w0 * a2 / (c * c * a1);

    SurfaceData {
        intermediates: HopfIntermediates {
            normalization: omega,
            q02,
            g20,
            g11,
            g02,
            g21,
            e,
            f,
            a1,
            a2,
            w20_at_zero,
            w20_at_minus_tau,
            w11,
        },
        c1_pipeline,
        c1_compact,
    }
}

/// First Lyapunov coefficient `c1(0)` at the `kappa = 1` surface point
/// of angle `theta_cap`, for capacity `cap` and delay `tau`.
///
/// The real part is evaluated from the trigonometric closed form and the
/// imaginary part from the compact pre-substitution product; the full
/// centre-manifold pipeline (quadratic coefficients, `w20`/`w11` terms,
/// cubic coefficient) is run alongside and must agree to `1e-8`, else an
/// internal error is raised. Scales exactly as `1 / (C^2 tau)`.
pub fn lyapunov_c1(theta_cap: f64, cap: f64, tau: f64) -> Result<Complex64> {
    validate_theta_cap(theta_cap)?;
    require_positive("cap", cap)?;
    require_positive("tau", tau)?;
    let data = surface_data(theta_cap, cap, tau);
    let c1 = Complex64::new(
        printed_re_c1(theta_cap) / (cap * cap * tau),
        data.c1_compact.im,
    );
    let scale = 1.0f64.max(c1.norm());
    if (c1 - data.c1_compact).norm() > CROSS_CHECK_TOL * scale
        || (c1 - data.c1_pipeline).norm() > CROSS_CHECK_TOL * scale
    {
        return Err(Error::Internal(format!(
            "c1 routes disagree at Theta = {theta_cap}: closed {c1}, \
             compact {}, pipeline {}",
            data.c1_compact, data.c1_pipeline
        )));
    }
    Ok(c1)
}

fn validate_theta_cap(theta_cap: f64) -> Result<()> {
    if !theta_cap.is_finite() || theta_cap <= 0.0 || theta_cap > std::f64::consts::FRAC_PI_2 {
        return Err(Error::domain(
            "theta_cap",
            format!("must lie in (0, pi/2], got {theta_cap}"),
        ));
    }
    Ok(())
}

/// Crossing speed `alpha'(0) = d Re(lambda)/d kappa` at the bifurcation,
/// in the scaled closed form
///
/// ```text
///   alpha'(0) = (Theta / (kappa tau)) * 4 Theta (1 + sin^2 Theta) / D2
///   D2 = (3 + cos 2 Theta)^2 + (2 Theta - sin 2 Theta)^2
/// ```
///
/// Always positive on the surface (the root pair moves right as `kappa`
/// grows); a non-positive value is reported as an internal error.
pub fn alpha_prime(theta_cap: f64, kappa: f64, tau: f64) -> Result<f64> {
    validate_theta_cap(theta_cap)?;
    require_positive("kappa", kappa)?;
    require_positive("tau", tau)?;
    let th = theta_cap;
    let d2 = {
        let re = 3.0 + (2.0 * th).cos();
        let im = 2.0 * th - (2.0 * th).sin();
        re * re + im * im
    };
    let value = th / (kappa * tau) * 4.0 * th * (1.0 + th.sin() * th.sin()) / d2;
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::Internal(format!(
            "crossing speed came out non-positive ({value}) at Theta = {th}"
        )));
    }
    Ok(value)
}

/// Full normal-form report for `(a, beta)` with capacity `cap` and delay
/// `tau`, evaluated at the critical gain `kappa_c(a, beta)`.
///
/// Requires `beta > 0`: without queue feedback the crossing happens at
/// `Theta = pi/2` through a different reduction, covered by
/// [`amplitude_no_queue`].
pub fn hopf_report(a: f64, beta: f64, cap: f64, tau: f64) -> Result<HopfReport> {
    require_positive("a", a)?;
    require_non_negative("beta", beta)?;
    if beta == 0.0 {
        return Err(Error::domain(
            "beta",
            "normal-form report needs queue feedback (beta > 0); \
             use the rate-only amplitude law instead"
                .to_string(),
        ));
    }
    require_positive("cap", cap)?;
    require_positive("tau", tau)?;
    let th = theta(a, beta)?;
    let kappa_c = hopf_kappa_c(a, beta)?;
    let theta_cap = kappa_c * th.theta; // = asin(a / theta)
    let omega0 = theta_cap / tau;
    let c1 = lyapunov_c1(theta_cap, cap, tau)?;
    let data = surface_data(theta_cap, cap, tau);
    let alpha = alpha_prime(theta_cap, kappa_c, tau)?;
    let mu2 = -c1.re / alpha;
    let beta2 = 2.0 * c1.re;
    Ok(HopfReport {
        omega0,
        theta: theta_cap,
        c1,
        alpha_prime: alpha,
        mu2,
        beta2,
        classification: if mu2 < 0.0 {
            Criticality::SubCritical
        } else {
            Criticality::SuperCritical
        },
        intermediates: data.intermediates,
    })
}

/// Bifurcation-type coefficients along the critical surface,
/// parameterised directly by the crossing angle `Theta` on the nominal
/// (`kappa_c = 1`) boundary.
///
/// Returns `(mu2, beta2, classification)` — the quantities a full
/// [`hopf_report`] carries — for sweep output where the underlying
/// `(a, beta)` pair stays implicit.
pub fn surface_coefficients(theta_cap: f64, cap: f64, tau: f64) -> Result<(f64, f64, Criticality)> {
    let c1 = lyapunov_c1(theta_cap, cap, tau)?;
    let alpha = alpha_prime(theta_cap, 1.0, tau)?;
    let mu2 = -c1.re / alpha;
    let beta2 = 2.0 * c1.re;
    let classification = if mu2 < 0.0 {
        Criticality::SubCritical
    } else {
        Criticality::SuperCritical
    };
    Ok((mu2, beta2, classification))
}

/// The criticality threshold `Theta_h`: the unique zero of
/// `Re c1(Theta)` in `(0, pi/2)`. Sub-critical below, super-critical
/// above.
pub fn theta_threshold() -> Result<f64> {
    bisect(printed_re_c1, 0.2, 1.55)
}

/// Leading-order amplitude of the rate oscillation for the rate-only
/// loop just past its threshold:
///
/// ```text
///   amplitude = R* sqrt( 20 pi (kappa - kappa_c) / (3 pi - 2) )
/// ```
///
/// Defined for `kappa >= kappa_c` (zero exactly at the threshold);
/// querying below the threshold is a domain error naming `kappa`.
pub fn amplitude_no_queue(kappa: f64, kappa_c: f64, r_star: f64) -> Result<f64> {
    require_positive("kappa_c", kappa_c)?;
    require_positive("r_star", r_star)?;
    if !kappa.is_finite() || kappa < kappa_c {
        return Err(Error::domain(
            "kappa",
            format!("amplitude law needs kappa >= kappa_c = {kappa_c}, got {kappa}"),
        ));
    }
    let coeff = 20.0 * std::f64::consts::PI / (3.0 * std::f64::consts::PI - 2.0);
    Ok(r_star * (coeff * (kappa - kappa_c)).sqrt())
}
