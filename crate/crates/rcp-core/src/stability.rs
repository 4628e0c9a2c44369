//! Local stability of the fluid equilibrium: stability region, Hopf
//! threshold, and rightmost characteristic roots.
//!
//! Linearising about `(R*, q*) = (C, 0)` and writing `s = lambda tau`
//! compresses all parameter dependence into `a`, `beta`, `kappa`: the
//! characteristic function becomes
//!
//! ```text
//!   G(s) = s^2 e^s + a kappa s + kappa^2 beta        (beta > 0)
//!   H(s) = s e^s + a kappa                           (beta = 0)
//! ```
//!
//! and every root scales as `lambda = s / tau`. Define
//!
//! ```text
//!   theta(a, beta) = sqrt( (a^2 + sqrt(a^4 + 4 beta^2)) / 2 )
//! ```
//!
//! Then the equilibrium is locally asymptotically stable iff
//!
//! ```text
//!   kappa * theta < asin(a / theta)
//! ```
//!
//! (for `beta = 0` this reduces to `a kappa < pi/2`), and on the boundary
//! `kappa_c = asin(a / theta) / theta` a pair of roots crosses the
//! imaginary axis at `omega_0 = kappa_c theta / tau` — a Hopf bifurcation
//! in the loop gain.
//!
//! Root finding uses two independent routes: a Chebyshev-collocation
//! eigenproblem polished by Newton iteration on the exact characteristic
//! function (any `beta`), and, for `beta = 0` only, the closed form
//! `lambda_k = W_k(-a kappa) / tau` through the Lambert-W branches. The
//! two must agree; tests hold them to within `1e-8`.

use std::fmt;

use num_complex::Complex64;

use crate::colloc;
use crate::error::{Error, Result};
use crate::lambert::lambert_w;
use crate::numeric::{bisect, require_positive};
use crate::params::{validate_params, ProtocolParams};

/// Residual bound every reported root must satisfy.
const RESIDUAL_TOL: f64 = 1e-10;
/// Collocation sizes tried in turn; consecutive sizes must agree on the
/// leading roots before a spectrum is accepted.
const NODE_LADDER: [usize; 4] = [64, 128, 256, 512];
/// Agreement tolerance between consecutive collocation sizes.
const DOUBLING_TOL: f64 = 1e-8;
/// Two refined roots closer than this (relative) are the same root.
const MERGE_TOL: f64 = 1e-6;
/// Imaginary parts below this (relative) are snapped to the real axis.
const REAL_AXIS_TOL: f64 = 1e-9;

/// The composite gain `theta` together with the `(a, beta)` pair it was
/// computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaValue {
    /// `sqrt((a^2 + sqrt(a^4 + 4 beta^2)) / 2)`; collapses to `a` when
    /// `beta = 0`.
    pub theta: f64,
    /// Rate-mismatch gain the value was computed from.
    pub a: f64,
    /// Queue-drain gain the value was computed from.
    pub beta: f64,
}

/// Computes `theta(a, beta)`, the frequency-like composite of the two
/// gains that controls the stability condition.
///
/// Requires `a > 0` and `beta >= 0`, both finite. Monotone increasing in
/// `beta`, and exactly `a` at `beta = 0`.
pub fn theta(a: f64, beta: f64) -> Result<ThetaValue> {
    crate::numeric::require_positive("a", a)?;
    crate::numeric::require_non_negative("beta", beta)?;
    let theta = if beta == 0.0 {
        a
    } else {
        let inner = (a.powi(4) + 4.0 * beta * beta).sqrt();
        ((a * a + inner) / 2.0).sqrt()
    };
    Ok(ThetaValue { theta, a, beta })
}

/// Critical loop gain `kappa_c = asin(a / theta) / theta` at which the
/// equilibrium loses stability through a Hopf bifurcation.
///
/// For `beta = 0` this is `pi / (2 a)`. The crossing frequency is
/// `omega_0 = kappa_c theta / tau`.
pub fn hopf_kappa_c(a: f64, beta: f64) -> Result<f64> {
    let th = theta(a, beta)?.theta;
    Ok((a / th).asin() / th)
}

/// Local asymptotic stability of the equilibrium: `kappa theta <
/// asin(a / theta)`, strict. Boundary points report `false`.
pub fn is_locally_stable(p: &ProtocolParams) -> Result<bool> {
    let p = validate_params(p)?;
    let th = theta(p.a, p.beta)?.theta;
    Ok(p.kappa * th < (p.a / th).asin())
}

/// The queue gain that places `(a, beta)` exactly on the stability
/// boundary of the nominal (`kappa = 1`) loop.
///
/// Solves `theta sin theta = a` for `theta` in `(a, pi/2)` and maps back
/// to `beta = sqrt((2 theta^2 - a^2)^2 - a^4) / 2`. Defined for
/// `0 < a < pi/2`; at `a >= pi/2` the rate loop alone is already
/// unstable at `kappa = 1` and no queue gain can place the system on the
/// boundary, which is reported as a domain error.
pub fn stability_boundary_beta(a: f64) -> Result<f64> {
    require_positive("a", a)?;
    if a >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::domain(
            "a",
            format!("boundary is only defined for a < pi/2, got {a}"),
        ));
    }
    let th = bisect(|t| t * t.sin() - a, a, std::f64::consts::FRAC_PI_2)?;
    let two_th2_minus_a2 = 2.0 * th * th - a * a;
    let beta_sq4 = two_th2_minus_a2 * two_th2_minus_a2 - a.powi(4);
    Ok(beta_sq4.max(0.0).sqrt() / 2.0)
}

/// How a spectrum was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMethod {
    /// Chebyshev-collocation eigenvalues polished by Newton iteration on
    /// the exact characteristic function.
    SpectralNewton,
    /// Closed-form Lambert-W branches (rate-only loop, `beta = 0`).
    LambertWOracle,
}

impl fmt::Display for SpectrumMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumMethod::SpectralNewton => write!(f, "spectral+newton"),
            SpectrumMethod::LambertWOracle => write!(f, "lambertW-oracle"),
        }
    }
}

/// The rightmost part of a characteristic spectrum.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Roots `lambda`, sorted by decreasing real part (ties broken by
    /// decreasing imaginary part, so each conjugate pair lists the upper
    /// root first).
    pub roots: Vec<Complex64>,
    /// `|char(lambda)|` for each root, in the same order; always below
    /// `1e-10`.
    pub residuals: Vec<f64>,
    /// Which route produced the roots.
    pub method: SpectrumMethod,
    /// Newton seeds that failed to converge and were discarded (always 0
    /// for the Lambert-W route).
    pub dropped_seeds: usize,
}

impl Spectrum {
    /// The root with the largest real part.
    pub fn rightmost(&self) -> Complex64 {
        self.roots[0]
    }
}

/// Exact characteristic function and its first two derivatives, in the
/// delay-normalised variable `s = lambda tau`.
#[derive(Clone, Copy)]
struct Characteristic {
    a_kappa: f64,
    kappa_sq_beta: f64,
    scalar: bool,
}

impl Characteristic {
    fn new(p: &ProtocolParams) -> Self {
        Characteristic {
            a_kappa: p.a * p.kappa,
            kappa_sq_beta: p.kappa * p.kappa * p.beta,
            scalar: p.beta == 0.0,
        }
    }

    /// `G(s) = s^2 e^s + a kappa s + kappa^2 beta`, or
    /// `H(s) = s e^s + a kappa` in the scalar case.
    fn eval(&self, s: Complex64) -> Complex64 {
        let es = s.exp();
        if self.scalar {
            s * es + self.a_kappa
        } else {
            s * s * es + self.a_kappa * s + self.kappa_sq_beta
        }
    }

    fn deriv(&self, s: Complex64) -> Complex64 {
        let es = s.exp();
        if self.scalar {
            (s + 1.0) * es
        } else {
            (s * s + 2.0 * s) * es + self.a_kappa
        }
    }

    fn second_deriv(&self, s: Complex64) -> Complex64 {
        let es = s.exp();
        if self.scalar {
            (s + 2.0) * es
        } else {
            (s * s + 4.0 * s + 2.0) * es
        }
    }

    /// Residual in the un-normalised variable `lambda = s / tau`, matching
    /// the characteristic form the crate reports:
    /// `|tau^2 lambda^2 e^{lambda tau} + a kappa tau lambda +
    /// kappa^2 beta|` for the planar loop and
    /// `|lambda + (a kappa / tau) e^{-lambda tau}|` for the scalar one.
    fn lambda_residual(&self, s: Complex64, tau: f64) -> f64 {
        if self.scalar {
            (s / tau + self.a_kappa / tau * (-s).exp()).norm()
        } else {
            self.eval(s).norm()
        }
    }
}

/// Halley polish of one seed. Returns the refined root, or `None` if the
/// iteration stalls away from a root.
fn refine(chi: &Characteristic, seed: Complex64) -> Option<Complex64> {
    let mut s = seed;
    for _ in 0..100 {
        let f = chi.eval(s);
        let fp = chi.deriv(s);
        // Halley's method keeps quadratic-or-better convergence near
        // simple roots and still converges (linearly) at the defective
        // double root the scalar loop develops at a kappa = 1/e.
        let denom = fp - f * chi.second_deriv(s) / (2.0 * fp);
        if !denom.is_finite() || denom.norm() == 0.0 {
            return None;
        }
        let step = f / denom;
        s -= step;
        if !s.is_finite() {
            return None;
        }
        if step.norm() <= 1e-13 * (1.0 + s.norm()) {
            return Some(s);
        }
    }
    Some(s) // accept; the residual gate downstream decides
}

/// One collocation size worth of refined roots: polish the seeds, drop
/// failures, merge duplicates, mirror conjugates, sort.
fn refined_spectrum(
    p: &ProtocolParams,
    chi: &Characteristic,
    n_nodes: usize,
    want: usize,
) -> (Vec<Complex64>, usize) {
    let seeds = if chi.scalar {
        colloc::scalar_seeds(p.a, p.kappa, n_nodes, want + 10)
    } else {
        colloc::planar_seeds(p.a, p.beta, p.kappa, n_nodes, want + 10)
    };
    let mut roots: Vec<Complex64> = Vec::new();
    let mut dropped = 0usize;
    for seed in seeds {
        let Some(root) = refine(chi, seed) else {
            dropped += 1;
            continue;
        };
        if chi.lambda_residual(root, p.tau) >= RESIDUAL_TOL {
            dropped += 1;
            continue;
        }
        let scale = 1.0f64.max(root.norm());
        if roots.iter().any(|r| (r - root).norm() <= MERGE_TOL * scale) {
            continue; // duplicate of an already-polished root
        }
        roots.push(root);
    }
    // Snap essentially-real roots onto the axis, then add the missing
    // conjugate partners (seeds were restricted to the upper half-plane).
    let mut full: Vec<Complex64> = Vec::with_capacity(2 * roots.len());
    for r in roots {
        if r.im.abs() <= REAL_AXIS_TOL * 1.0f64.max(r.re.abs()) {
            full.push(Complex64::new(r.re, 0.0));
        } else {
            full.push(r);
            full.push(r.conj());
        }
    }
    full.sort_by(|p, q| q.re.total_cmp(&p.re).then(q.im.total_cmp(&p.im)));
    (full, dropped)
}

/// The `n_roots` rightmost characteristic roots of the linearised loop.
///
/// Seeds come from a Chebyshev-collocation eigenproblem and are polished
/// by Halley iteration on the exact characteristic function; each
/// reported root carries a residual below `1e-10`. The collocation size
/// is doubled (64, 128, 256, 512 nodes) until two consecutive sizes agree
/// on the leading roots to `1e-8`; failure to stabilise is a convergence
/// error. For `beta = 0` the scalar characteristic is used, so the
/// decoupled pure-queue mode is not part of the reported spectrum.
pub fn rightmost_roots(p: &ProtocolParams, n_roots: usize) -> Result<Spectrum> {
    let p = validate_params(p)?.into_inner();
    if n_roots == 0 {
        return Err(Error::domain("n_roots", "must be at least 1".to_string()));
    }
    let chi = Characteristic::new(&p);
    let mut prev: Option<(Vec<Complex64>, usize)> = None;
    for &n_nodes in &NODE_LADDER {
        let (roots, dropped) = refined_spectrum(&p, &chi, n_nodes, n_roots);
        if let Some((prev_roots, _)) = &prev {
            let enough = roots.len() >= n_roots && prev_roots.len() >= n_roots;
            let agreed = enough
                && roots[..n_roots]
                    .iter()
                    .zip(&prev_roots[..n_roots])
                    .all(|(r, q)| (r - q).norm() <= DOUBLING_TOL * 1.0f64.max(r.norm()));
            if agreed {
                let lambdas: Vec<Complex64> = roots[..n_roots].iter().map(|s| s / p.tau).collect();
                let residuals: Vec<f64> = roots[..n_roots]
                    .iter()
                    .map(|&s| chi.lambda_residual(s, p.tau))
                    .collect();
                return Ok(Spectrum {
                    roots: lambdas,
                    residuals,
                    method: SpectrumMethod::SpectralNewton,
                    dropped_seeds: dropped,
                });
            }
        }
        prev = Some((roots, dropped));
    }
    Err(Error::Convergence(format!(
        "leading {n_roots} characteristic roots did not stabilise under \
         node doubling up to {} collocation nodes",
        NODE_LADDER[NODE_LADDER.len() - 1]
    )))
}

/// Closed-form spectrum of the rate-only loop (`beta = 0`):
/// `lambda_k = W_k(-a kappa) / tau` over the Lambert-W branches
/// `k = 0, -1, 1, -2, 2, ...`, sorted by decreasing real part.
///
/// This is an independent oracle for [`rightmost_roots`]; the two routes
/// agree to well below `1e-8` and the test suites hold them to it.
pub fn lambert_w_roots(a: f64, kappa: f64, tau: f64, n_roots: usize) -> Result<Spectrum> {
    require_positive("a", a)?;
    require_positive("kappa", kappa)?;
    require_positive("tau", tau)?;
    if n_roots == 0 {
        return Err(Error::domain("n_roots", "must be at least 1".to_string()));
    }
    let z = Complex64::new(-a * kappa, 0.0);
    let chi = Characteristic::new(&ProtocolParams::new(a, 0.0, 1.0, 1.0).with_kappa(kappa));
    let mut lambdas: Vec<Complex64> = Vec::new();
    // Branch order 0, -1, 1, -2, 2, ...; a couple of spare branches cover
    // the possible merge at the W branch point (a kappa = 1/e).
    for j in 0..(n_roots + 4) {
        let k = if j % 2 == 0 {
            (j / 2) as i32
        } else {
            -((j / 2 + 1) as i32)
        };
        let w = lambert_w(k, z)?;
        let s = w; // s = lambda tau = W_k(-a kappa)
        let scale = 1.0f64.max(s.norm());
        if lambdas
            .iter()
            .any(|l| (l * tau - s).norm() <= MERGE_TOL * scale)
        {
            continue; // branches 0 and -1 coincide at the branch point
        }
        lambdas.push(s / tau);
    }
    lambdas.sort_by(|p, q| q.re.total_cmp(&p.re).then(q.im.total_cmp(&p.im)));
    lambdas.truncate(n_roots);
    let residuals: Vec<f64> = lambdas
        .iter()
        .map(|&l| chi.lambda_residual(l * tau, tau))
        .collect();
    // The finiteness arm catches NaN residuals.
    if let Some(bad) = residuals
        .iter()
        .find(|r| !r.is_finite() || **r >= RESIDUAL_TOL)
    {
        return Err(Error::Convergence(format!(
            "Lambert-W root failed the residual gate: {bad:.3e}"
        )));
    }
    Ok(Spectrum {
        roots: lambdas,
        residuals,
        method: SpectrumMethod::LambertWOracle,
        dropped_seeds: 0,
    })
}

/// Sign certificate for the Hopf crossing speed: the closed-form value of
/// `Re (d lambda / d kappa)^{-1}` at `kappa = kappa_c` (with `tau = 1`;
/// the sign is `tau`-independent),
///
/// ```text
///   kappa_c (a^2 Theta^2 + 2 kappa_c^2 beta^2) /
///           (a^2 Theta^2 + 4 kappa_c^2 beta^2),    Theta = kappa_c theta.
/// ```
///
/// A positive value certifies that the root pair crosses the imaginary
/// axis with increasing `kappa`, i.e. the loss of stability at `kappa_c`
/// is a genuine Hopf bifurcation. The value is positive throughout the
/// parameter domain; a non-positive result is an internal error.
pub fn transversality_sign(a: f64, beta: f64) -> Result<f64> {
    let th = theta(a, beta)?;
    let kappa_c = hopf_kappa_c(a, beta)?;
    let big_theta = kappa_c * th.theta;
    let a_th_sq = a * a * big_theta * big_theta;
    let kb_sq = kappa_c * kappa_c * beta * beta;
    let value = kappa_c * (a_th_sq + 2.0 * kb_sq) / (a_th_sq + 4.0 * kb_sq);
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::Internal(format!(
            "transversality certificate came out non-positive ({value}) at \
             a = {a}, beta = {beta}"
        )));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn theta_collapses_to_a_without_queue_feedback() {
        assert_eq!(theta(0.7, 0.0).unwrap().theta, 0.7);
    }

    #[test]
    fn theta_reference_value() {
        // 40-digit reference at (a, beta) = (1.5, 0.1).
        assert_abs_diff_eq!(theta(1.5, 0.1).unwrap().theta, 1.5014778386, epsilon = 1e-9);
    }

    #[test]
    fn kappa_c_reference_values() {
        assert_abs_diff_eq!(
            hopf_kappa_c(1.5, 0.1).unwrap(),
            1.01661491823,
            epsilon = 1e-9
        );
        // beta = 0 closes to pi / (2a).
        assert_abs_diff_eq!(
            hopf_kappa_c(0.4, 0.0).unwrap(),
            std::f64::consts::FRAC_PI_2 / 0.4,
            epsilon = 1e-13
        );
    }

    #[test]
    fn stability_is_strict_at_the_boundary() {
        let kappa_c = hopf_kappa_c(1.5, 0.1).unwrap();
        let p = ProtocolParams::new(1.5, 0.1, 10.0, 1.0);
        assert!(is_locally_stable(&p.with_kappa(kappa_c * 0.999)).unwrap());
        assert!(!is_locally_stable(&p.with_kappa(kappa_c)).unwrap());
        assert!(!is_locally_stable(&p.with_kappa(kappa_c * 1.001)).unwrap());
    }

    #[test]
    fn boundary_beta_reference_values() {
        assert_abs_diff_eq!(
            stability_boundary_beta(0.5).unwrap(),
            0.404993649233,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            stability_boundary_beta(1.5).unwrap(),
            0.152190142014,
            epsilon = 1e-9
        );
        assert!(stability_boundary_beta(std::f64::consts::FRAC_PI_2).is_err());
    }

    #[test]
    fn boundary_point_is_marginal_under_the_closed_form() {
        let a = 0.75;
        let beta = stability_boundary_beta(a).unwrap();
        let kappa_c = hopf_kappa_c(a, beta).unwrap();
        assert_abs_diff_eq!(kappa_c, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn transversality_positive_on_a_grid() {
        for a in [0.2, 0.75, 1.25, 1.5] {
            for beta in [0.0, 0.1, 0.3, 0.5] {
                assert!(transversality_sign(a, beta).unwrap() > 0.0);
            }
        }
        // Reference value at (1.5, 0.1).
        assert_abs_diff_eq!(
            transversality_sign(1.5, 0.1).unwrap(),
            1.0126379,
            epsilon = 1e-6
        );
    }

    #[test]
    fn spectrum_method_labels() {
        assert_eq!(
            SpectrumMethod::SpectralNewton.to_string(),
            "spectral+newton"
        );
        assert_eq!(
            SpectrumMethod::LambertWOracle.to_string(),
            "lambertW-oracle"
        );
    }
}
