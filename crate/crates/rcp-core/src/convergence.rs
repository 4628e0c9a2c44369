//! Exponential decay rate of perturbations about the equilibrium.
//!
//! Inside the stability region every perturbation decays like
//! `e^{-sigma t}` with `sigma = -Re(lambda_1)`, the negated real part of
//! the rightmost characteristic root. For the rate-only loop
//! (`beta = 0`, nominal `kappa = 1`) the root structure of
//! `s e^s + a = 0` gives `sigma` in closed form through three branches:
//!
//! ```text
//!   a < 1/e :  two real roots; the shallow one binds:
//!              sigma_2 = x / tau  with  x e^{-x} = a,  x in (0, 1)
//!   a = 1/e :  defective double root at s = -1:
//!              sigma_1 = 1 / tau  (the largest rate attainable)
//!   a > 1/e :  a complex pair binds:
//!              sigma_3 = u cos(u) / (tau sin(u))  with
//!              (u / sin u) e^{-u cos u / sin u} = a,  u in (0, pi/2)
//! ```
//!
//! The rate rises with `a` until `a = 1/e`, then falls, reaching zero at
//! `a = pi/2` where the loop goes unstable. Perturbations are
//! non-oscillatory exactly when `a <= 1/e`.
//!
//! With queue feedback (`beta > 0`) no closed form exists and the rate is
//! read off the computed spectrum ([`crate::stability::rightmost_roots`]).

use std::fmt;

use crate::error::Result;
use crate::numeric::{bisect, require_positive};
use crate::params::ProtocolParams;
use crate::stability::{is_locally_stable, rightmost_roots};

/// Qualitative behaviour of perturbations about the equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Stable, with monotone (real-root-dominated) decay.
    NonOscillatoryStable,
    /// Stable, but perturbations ring while they decay.
    OscillatoryStable,
    /// The equilibrium is not locally asymptotically stable.
    Unstable,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::NonOscillatoryStable => write!(f, "non_oscillatory_stable"),
            Regime::OscillatoryStable => write!(f, "oscillatory_stable"),
            Regime::Unstable => write!(f, "unstable"),
        }
    }
}

/// Which expression produced the reported decay rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindingBranch {
    /// The saturation value `1 / tau` at the defective double root
    /// (`a = 1/e` exactly).
    Sigma1,
    /// The shallow real root (`a < 1/e`).
    Sigma2,
    /// The complex pair (`1/e < a < pi/2`); also reported, with rate
    /// zero, when the rate-only loop is unstable.
    Sigma3,
    /// The computed rightmost characteristic root (queue-feedback path).
    RightmostRoot,
}

impl fmt::Display for BindingBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BindingBranch::Sigma1 => write!(f, "sigma1"),
            BindingBranch::Sigma2 => write!(f, "sigma2"),
            BindingBranch::Sigma3 => write!(f, "sigma3"),
            BindingBranch::RightmostRoot => write!(f, "rightmost-root"),
        }
    }
}

/// Decay rate of perturbations, with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    /// Exponential rate `sigma >= 0`; perturbations decay like
    /// `e^{-sigma t}`. Zero when the equilibrium is not stable.
    pub sigma: f64,
    /// Which branch or computation attained the rate.
    pub binding_branch: BindingBranch,
    /// Qualitative behaviour.
    pub regime: Regime,
}

/// `1/e`, the gain of fastest rate-only convergence.
fn inv_e() -> f64 {
    (-1.0f64).exp()
}

/// Closed-form decay rate of the rate-only loop (`beta = 0`,
/// `kappa = 1`) at gain `a` and round-trip time `tau`.
///
/// Branch selection follows the module-level table; outside the stable
/// range (`a >= pi/2`) the report carries `sigma = 0` and the unstable
/// regime rather than an error, so parameter sweeps can cross the
/// boundary. `sigma * tau <= 1` always, with equality only at `a = 1/e`.
pub fn decay_rate_no_queue(a: f64, tau: f64) -> Result<ConvergenceReport> {
    require_positive("a", a)?;
    require_positive("tau", tau)?;
    if a >= std::f64::consts::FRAC_PI_2 {
        return Ok(ConvergenceReport {
            sigma: 0.0,
            binding_branch: BindingBranch::Sigma3,
            regime: Regime::Unstable,
        });
    }
    if (a - inv_e()).abs() < 1e-15 {
        return Ok(ConvergenceReport {
            sigma: 1.0 / tau,
            binding_branch: BindingBranch::Sigma1,
            regime: Regime::NonOscillatoryStable,
        });
    }
    if a < inv_e() {
        // Shallow real root: x e^{-x} = a has exactly one solution in
        // (0, 1); the map is increasing there with maximum 1/e at x = 1.
        let x = bisect(|x| x * (-x).exp() - a, 0.0, 1.0)?;
        return Ok(ConvergenceReport {
            sigma: x / tau,
            binding_branch: BindingBranch::Sigma2,
            regime: Regime::NonOscillatoryStable,
        });
    }
    // Complex pair: parametrise the root as s = -u cot(u) + i u; the
    // defining relation (u / sin u) e^{-u cos u / sin u} = a is
    // increasing from 1/e (u -> 0) to pi/2 (u = pi/2).
    let g = |u: f64| (u / u.sin()) * (-u * u.cos() / u.sin()).exp();
    let u = bisect(|u| g(u) - a, 1e-8, std::f64::consts::FRAC_PI_2)?;
    Ok(ConvergenceReport {
        sigma: u * u.cos() / (tau * u.sin()),
        binding_branch: BindingBranch::Sigma3,
        regime: Regime::OscillatoryStable,
    })
}

/// Decay rate of the full loop (any `beta >= 0`), read off the rightmost
/// computed characteristic root.
///
/// Outside the stability region the report carries `sigma = 0` and the
/// unstable regime. Perturbations are classified oscillatory exactly when
/// the rightmost root has nonzero imaginary part.
pub fn decay_rate_with_queue(p: &ProtocolParams) -> Result<ConvergenceReport> {
    if !is_locally_stable(p)? {
        return Ok(ConvergenceReport {
            sigma: 0.0,
            binding_branch: BindingBranch::RightmostRoot,
            regime: Regime::Unstable,
        });
    }
    let spectrum = rightmost_roots(p, 1)?;
    let lambda = spectrum.rightmost();
    Ok(ConvergenceReport {
        sigma: -lambda.re,
        binding_branch: BindingBranch::RightmostRoot,
        regime: if lambda.im == 0.0 {
            Regime::NonOscillatoryStable
        } else {
            Regime::OscillatoryStable
        },
    })
}

/// Whether rate-only perturbations decay without ringing: `a <= 1/e`.
pub fn non_oscillatory(a: f64) -> Result<bool> {
    require_positive("a", a)?;
    Ok(a <= inv_e())
}

/// Qualitative regime of the rate-only loop at gain `a`.
pub fn classify_regime(a: f64) -> Result<Regime> {
    require_positive("a", a)?;
    Ok(if a <= inv_e() {
        Regime::NonOscillatoryStable
    } else if a < std::f64::consts::FRAC_PI_2 {
        Regime::OscillatoryStable
    } else {
        Regime::Unstable
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// 40-digit reference values for sigma(a) at tau = 1.
    #[test]
    fn closed_form_rates_match_reference() {
        let cases = [
            (0.1, 0.111832559159, BindingBranch::Sigma2),
            (0.2, 0.259171101819, BindingBranch::Sigma2),
            (0.3, 0.48940222718, BindingBranch::Sigma2),
            (0.5, 0.794023632345, BindingBranch::Sigma3),
            (1.0, 0.318131505205, BindingBranch::Sigma3),
            (1.2, 0.190462989058, BindingBranch::Sigma3),
            (1.5, 0.0327837359156, BindingBranch::Sigma3),
        ];
        for (a, sigma, branch) in cases {
            let report = decay_rate_no_queue(a, 1.0).unwrap();
            assert_abs_diff_eq!(report.sigma, sigma, epsilon = 1e-9);
            assert_eq!(report.binding_branch, branch, "a = {a}");
        }
    }

    #[test]
    fn fastest_decay_is_one_over_tau_at_inv_e() {
        for tau in [0.5, 1.0, 2.0] {
            let report = decay_rate_no_queue((-1.0f64).exp(), tau).unwrap();
            assert_eq!(report.sigma, 1.0 / tau);
            assert_eq!(report.binding_branch, BindingBranch::Sigma1);
        }
    }

    #[test]
    fn rate_scales_inversely_with_tau() {
        for a in [0.2, 0.9] {
            let r1 = decay_rate_no_queue(a, 1.0).unwrap().sigma;
            let r2 = decay_rate_no_queue(a, 2.0).unwrap().sigma;
            let r_half = decay_rate_no_queue(a, 0.5).unwrap().sigma;
            assert_abs_diff_eq!(r2, r1 / 2.0, epsilon = 1e-13);
            assert_abs_diff_eq!(r_half, 2.0 * r1, epsilon = 1e-13);
        }
    }

    #[test]
    fn unstable_gain_reports_zero_rate() {
        let report = decay_rate_no_queue(2.0, 1.0).unwrap();
        assert_eq!(report.sigma, 0.0);
        assert_eq!(report.regime, Regime::Unstable);
        let boundary = decay_rate_no_queue(std::f64::consts::FRAC_PI_2, 1.0).unwrap();
        assert_eq!(boundary.sigma, 0.0);
    }

    #[test]
    fn oscillation_threshold_is_inv_e() {
        assert!(non_oscillatory(0.3).unwrap());
        assert!(non_oscillatory((-1.0f64).exp()).unwrap());
        assert!(!non_oscillatory(0.37).unwrap());
        assert_eq!(classify_regime(0.3).unwrap(), Regime::NonOscillatoryStable);
        assert_eq!(classify_regime(1.0).unwrap(), Regime::OscillatoryStable);
        assert_eq!(classify_regime(1.6).unwrap(), Regime::Unstable);
    }

    #[test]
    fn display_strings_are_stable() {
        assert_eq!(Regime::OscillatoryStable.to_string(), "oscillatory_stable");
        assert_eq!(BindingBranch::RightmostRoot.to_string(), "rightmost-root");
        assert_eq!(BindingBranch::Sigma2.to_string(), "sigma2");
    }
}
