//! Built-in acceptance suite: thirteen end-to-end checks pinning the
//! documented reference behaviour of every analysis and simulation
//! route.
//!
//! The `repro` subcommand of the CLI runs [`run_all`] and prints one
//! line per criterion; the integration tests do the same. Each outcome
//! carries the measured numbers so a failure is diagnosable from the
//! report alone. The checks are ordered, independent, and deterministic.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::convergence::{decay_rate_no_queue, decay_rate_with_queue};
use crate::error::Result;
use crate::fluid::{analyze_trajectory, simulate, InitialCondition, SimConfig, TrajectoryVerdict};
use crate::hopf::{hopf_report, lyapunov_c1, theta_threshold, Criticality};
use crate::numeric::{bisect, golden_max};
use crate::packet::{queue_stats, run_packet_sim, PacketSimConfig};
use crate::params::{equilibrium, validate_params, ProtocolParams};
use crate::stability::{
    hopf_kappa_c, is_locally_stable, rightmost_roots, stability_boundary_beta, transversality_sign,
};

/// Result of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    /// Criterion number, 1 through 13.
    pub id: usize,
    /// Short name of the property under check.
    pub title: &'static str,
    /// Whether every clause of the criterion held.
    pub passed: bool,
    /// Measured values, tolerances, and any failure specifics.
    pub details: String,
}

impl CriterionOutcome {
    /// One-line rendering: `criterion NN  pass|FAIL  title -- details`.
    pub fn render(&self) -> String {
        format!(
            "criterion {:02}  {}  {} -- {}",
            self.id,
            if self.passed { "pass" } else { "FAIL" },
            self.title,
            self.details
        )
    }
}

fn outcome(
    id: usize,
    title: &'static str,
    run: impl FnOnce() -> Result<(bool, String)>,
) -> CriterionOutcome {
    let (passed, details) = match run() {
        Ok((passed, details)) => (passed, details),
        Err(e) => (false, format!("did not complete: {e}")),
    };
    CriterionOutcome {
        id,
        title,
        passed,
        details,
    }
}

/// Runs the full suite in order. Criteria are independent: a failure in
/// one does not stop the others.
pub fn run_all() -> Vec<CriterionOutcome> {
    vec![
        outcome(1, "critical gain closed form vs spectral crossing", c01),
        outcome(2, "Hopf normal form, sub-critical reference pair", c02),
        outcome(3, "Hopf normal form, super-critical reference pair", c03),
        outcome(4, "criticality threshold angle and sign change", c04),
        outcome(5, "fastest rate-only decay at gain 1/e", c05),
        outcome(6, "decay rate falls as queue gain rises", c06),
        outcome(7, "monotone-to-ringing boundary at gain 1/e", c07),
        outcome(8, "fluid trajectories across the stability edge", c08),
        outcome(9, "square-root limit-cycle amplitude scaling", c09),
        outcome(10, "stability region agrees with the spectrum", c10),
        outcome(11, "packet-level oscillation contrasts", c11),
        outcome(12, "normal-form internal algebra guards", c12),
        outcome(13, "integrator end-state error halves like order 4", c13),
    ]
}

/// Criterion 1: the closed-form critical gain at `(a, beta) =
/// (1.5, 0.1)` sits within 2% of the nominal edge `kappa = 1`, and
/// within `1e-6` of an independently bisected sign change of the
/// spectral rightmost root.
fn c01() -> Result<(bool, String)> {
    let kc = hopf_kappa_c(1.5, 0.1)?;
    let re_at = |kappa: f64| -> f64 {
        let p = ProtocolParams::new(1.5, 0.1, 1.0, 1.0).with_kappa(kappa);
        rightmost_roots(&p, 4)
            .map(|s| s.rightmost().re)
            .unwrap_or(f64::NAN)
    };
    let crossing = bisect(re_at, 0.9, 1.1)?;
    let near_one = (kc - 1.0).abs() <= 0.02;
    let matches_spectral = (kc - crossing).abs() < 1e-6;
    Ok((
        near_one && matches_spectral,
        format!(
            "kappa_c = {kc:.9} (within 2% of 1: {near_one}), spectral crossing = {crossing:.9}, \
             |diff| = {:.2e} (< 1e-6: {matches_spectral})",
            (kc - crossing).abs()
        ),
    ))
}

/// Criterion 2: reference pair `(0.75, 0.518)` classifies sub-critical
/// with `mu2 = -0.1263` and `beta2 = 0.1775`, both to `1e-3`.
fn c02() -> Result<(bool, String)> {
    let report = hopf_report(0.75, 0.518, 1.0, 1.0)?;
    let mu2_ok = (report.mu2 - (-0.1263)).abs() <= 1e-3;
    let beta2_ok = (report.beta2 - 0.1775).abs() <= 1e-3;
    let class_ok = report.classification == Criticality::SubCritical;
    Ok((
        mu2_ok && beta2_ok && class_ok,
        format!(
            "mu2 = {:.7} (ref -0.1263 +/- 1e-3: {mu2_ok}), beta2 = {:.7} (ref 0.1775 +/- 1e-3: \
             {beta2_ok}), classification = {} ({class_ok})",
            report.mu2, report.beta2, report.classification
        ),
    ))
}

/// Criterion 3: reference pair `(1.25, 0.454)` classifies
/// super-critical with `mu2 = 0.1054` and `beta2 = -0.3068`, both to
/// `1e-3`.
///
/// The `beta2` clause is expected to fail: three independent
/// high-precision routes through the normal form all give `beta2 =
/// -0.30856` here, 1.8e-3 away from the quoted reference value, while
/// `mu2` agrees to 5e-4. The criterion is reported as measured.
fn c03() -> Result<(bool, String)> {
    let report = hopf_report(1.25, 0.454, 1.0, 1.0)?;
    let mu2_ok = (report.mu2 - 0.1054).abs() <= 1e-3;
    let beta2_ok = (report.beta2 - (-0.3068)).abs() <= 1e-3;
    let class_ok = report.classification == Criticality::SuperCritical;
    Ok((
        mu2_ok && beta2_ok && class_ok,
        format!(
            "mu2 = {:.7} (ref 0.1054 +/- 1e-3: {mu2_ok}), beta2 = {:.7} (ref -0.3068 +/- 1e-3: \
             {beta2_ok}), classification = {} ({class_ok})",
            report.mu2, report.beta2, report.classification
        ),
    ))
}

/// Criterion 4: the threshold angle is `1.1297` to `1e-3`, and the real
/// part of the Lyapunov coefficient changes sign across it.
fn c04() -> Result<(bool, String)> {
    let th = theta_threshold()?;
    let th_ok = (th - 1.1297).abs() <= 1e-3;
    let below = lyapunov_c1(th - 0.05, 1.0, 1.0)?.re;
    let above = lyapunov_c1(th + 0.05, 1.0, 1.0)?.re;
    let sign_ok = below > 0.0 && above < 0.0;
    Ok((
        th_ok && sign_ok,
        format!(
            "theta_h = {th:.9} (ref 1.1297 +/- 1e-3: {th_ok}), Re c1(theta_h - 0.05) = \
             {below:.6}, Re c1(theta_h + 0.05) = {above:.6} (sign change: {sign_ok})"
        ),
    ))
}

/// Criterion 5: for each `tau` in `{0.5, 1, 2}` the rate-only decay
/// rate peaks at `a = 1/e` (to `1e-4`) with maximum `1/tau`, and the
/// rate is zero at `a = pi/2`.
fn c05() -> Result<(bool, String)> {
    let inv_e = (-1.0f64).exp();
    let mut all_ok = true;
    let mut parts = Vec::new();
    for tau in [0.5, 1.0, 2.0] {
        let sigma = |a: f64| {
            decay_rate_no_queue(a, tau)
                .map(|r| r.sigma)
                .unwrap_or(f64::NEG_INFINITY)
        };
        let a_hat = golden_max(sigma, 0.05, 1.5);
        let peak = sigma(a_hat);
        let arg_ok = (a_hat - inv_e).abs() <= 1e-4;
        let peak_ok = (peak * tau - 1.0).abs() <= 1e-3;
        all_ok &= arg_ok && peak_ok;
        parts.push(format!(
            "tau={tau}: argmax {a_hat:.6} ({arg_ok}), sigma*tau = {:.6} ({peak_ok})",
            peak * tau
        ));
    }
    let at_edge = decay_rate_no_queue(FRAC_PI_2, 1.0)?.sigma;
    let edge_ok = at_edge == 0.0;
    all_ok &= edge_ok;
    parts.push(format!("sigma(pi/2) = {at_edge} ({edge_ok})"));
    Ok((all_ok, parts.join("; ")))
}

/// Criterion 6: at `a = 0.3` the decay rate is strictly decreasing over
/// `beta` in `{0, 0.1, 0.2, 0.3, 0.4}`, each point confirmed by a
/// spectral residual below `1e-10`.
///
/// The sweep runs at loop gain `kappa = 0.5`: at the nominal gain 1 the
/// larger two queue gains are already past the stability edge and have
/// no decay rate to compare.
fn c06() -> Result<(bool, String)> {
    let mut sigmas = Vec::new();
    let mut residual_ok = true;
    for beta in [0.0, 0.1, 0.2, 0.3, 0.4] {
        let p = ProtocolParams::new(0.3, beta, 1.0, 1.0).with_kappa(0.5);
        let report = decay_rate_with_queue(&p)?;
        let spectrum = rightmost_roots(&p, 4)?;
        residual_ok &= spectrum.residuals[0] < 1e-10;
        sigmas.push(report.sigma);
    }
    let decreasing = sigmas.windows(2).all(|w| w[1] < w[0]);
    let rendered: Vec<String> = sigmas.iter().map(|s| format!("{s:.6}")).collect();
    Ok((
        decreasing && residual_ok,
        format!(
            "sigma over beta 0..0.4 at kappa = 0.5: [{}] (strictly decreasing: {decreasing}, \
             residuals < 1e-10: {residual_ok})",
            rendered.join(", ")
        ),
    ))
}

/// Criterion 7: with no queue gain the rightmost root is purely real
/// just below `a = 1/e` and complex just above it.
fn c07() -> Result<(bool, String)> {
    let inv_e = (-1.0f64).exp();
    let below = rightmost_roots(&ProtocolParams::new(inv_e - 0.01, 0.0, 1.0, 1.0), 4)?.rightmost();
    let above = rightmost_roots(&ProtocolParams::new(inv_e + 0.01, 0.0, 1.0, 1.0), 4)?.rightmost();
    let below_real = below.im == 0.0;
    let above_complex = above.im != 0.0;
    Ok((
        below_real && above_complex,
        format!(
            "rightmost at a = 1/e - 0.01: {below} (real: {below_real}); at a = 1/e + 0.01: \
             {above} (complex: {above_complex})"
        ),
    ))
}

/// Criterion 8: fluid trajectories at `(1.5, 0.1)` converge for
/// `kappa = 0.95`, sustain an oscillation for `kappa = 1.05`, and the
/// sub-critical pair `(0.75, 0.518)` at `kappa = 1.05` from a 3%
/// perturbation sets the diverged flag.
fn c08() -> Result<(bool, String)> {
    let ic = InitialCondition { r0: 1.1, q0: 0.0 };

    let settle = ProtocolParams::new(1.5, 0.1, 1.0, 1.0).with_kappa(0.95);
    let traj = simulate(&settle, &ic, &SimConfig::new(300.0, 32))?;
    let final_r = *traj.r_values.last().expect("non-empty trajectory");
    let converged = (final_r - 1.0).abs() < 1e-3 && !traj.diverged;

    let ring = ProtocolParams::new(1.5, 0.1, 1.0, 1.0).with_kappa(1.05);
    let traj = simulate(&ring, &ic, &SimConfig::new(600.0, 32))?;
    let eq = equilibrium(&validate_params(&ring)?);
    let verdict = analyze_trajectory(&traj, &eq, 0.3)?;
    let (oscillates, amplitude) = match verdict {
        TrajectoryVerdict::SustainedOscillation { amplitude } => (true, amplitude),
        _ => (false, 0.0),
    };

    let escape = ProtocolParams::new(0.75, 0.518, 1.0, 1.0).with_kappa(1.05);
    let ic_small = InitialCondition { r0: 1.03, q0: 0.0 };
    let traj = simulate(&escape, &ic_small, &SimConfig::new(400.0, 32))?;
    let diverged = traj.diverged;

    Ok((
        converged && oscillates && diverged,
        format!(
            "kappa 0.95: |R_final - 1| = {:.2e} ({converged}); kappa 1.05: sustained \
             oscillation {oscillates} (amplitude {amplitude:.4}); sub-critical escape \
             diverged: {diverged}",
            (final_r - 1.0).abs()
        ),
    ))
}

/// Criterion 9: just past the rate-only stability edge the simulated
/// limit-cycle amplitude follows the square-root law: doubling the gain
/// offset (0.01 to 0.04 is two doublings) doubles the amplitude to
/// within 10%, and the fitted log-log exponent over three offsets is
/// `0.5 +/- 0.05`.
fn c09() -> Result<(bool, String)> {
    let kappa_c = FRAC_PI_2; // beta = 0, a = 1: kappa_c = pi/(2a)
    let offsets = [0.01, 0.02, 0.04];
    let horizons = [2500.0, 2000.0, 2000.0];
    let mut amplitudes = Vec::new();
    for (offset, horizon) in offsets.iter().zip(horizons) {
        let p = ProtocolParams::new(1.0, 0.0, 1.0, 1.0).with_kappa(kappa_c + offset);
        let ic = InitialCondition { r0: 1.05, q0: 0.0 };
        let traj = simulate(&p, &ic, &SimConfig::new(horizon, 32))?;
        let eq = equilibrium(&validate_params(&p)?);
        match analyze_trajectory(&traj, &eq, 0.3)? {
            TrajectoryVerdict::SustainedOscillation { amplitude } => amplitudes.push(amplitude),
            other => {
                return Ok((
                    false,
                    format!("offset {offset}: expected a sustained oscillation, got {other:?}"),
                ))
            }
        }
    }
    let ratio = amplitudes[2] / amplitudes[0];
    let ratio_ok = (ratio - 2.0).abs() <= 0.2;
    // Least-squares slope of ln A against ln offset.
    let xs: Vec<f64> = offsets.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = amplitudes.iter().map(|a| a.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / 3.0;
    let y_mean = ys.iter().sum::<f64>() / 3.0;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum::<f64>()
        / xs.iter().map(|x| (x - x_mean).powi(2)).sum::<f64>();
    let slope_ok = (slope - 0.5).abs() <= 0.05;
    Ok((
        ratio_ok && slope_ok,
        format!(
            "amplitudes at offsets {offsets:?}: [{:.5}, {:.5}, {:.5}]; ratio(0.04/0.01) = \
             {ratio:.4} (2 +/- 10%: {ratio_ok}); fitted exponent = {slope:.4} (0.5 +/- 0.05: \
             {slope_ok})",
            amplitudes[0], amplitudes[1], amplitudes[2]
        ),
    ))
}

/// Criterion 10: on a 20 x 20 parameter grid the closed-form stability
/// region agrees with the sign of the spectral rightmost root at every
/// point at least `1e-3` away from the boundary curve.
fn c10() -> Result<(bool, String)> {
    let mut checked = 0usize;
    let mut skipped = 0usize;
    let mut mismatches = Vec::new();
    for i in 0..20 {
        let a = (i + 1) as f64 * FRAC_PI_2 / 21.0;
        let boundary = stability_boundary_beta(a)?;
        for j in 0..20 {
            let beta = j as f64 / 19.0;
            if (beta - boundary).abs() <= 1e-3 {
                skipped += 1;
                continue;
            }
            let p = ProtocolParams::new(a, beta, 1.0, 1.0);
            let closed_form = is_locally_stable(&p)?;
            let spectral = rightmost_roots(&p, 2)?.rightmost().re < 0.0;
            checked += 1;
            if closed_form != spectral {
                mismatches.push(format!("(a={a:.4}, beta={beta:.4})"));
            }
        }
    }
    Ok((
        mismatches.is_empty(),
        format!(
            "{checked} grid points checked, {skipped} within 1e-3 of the boundary skipped, \
             {} mismatches{}{}",
            mismatches.len(),
            if mismatches.is_empty() { "" } else { ": " },
            mismatches.join(", ")
        ),
    ))
}

/// Criterion 11: packet-level runs reproduce the qualitative
/// queue-feedback contrasts: `(0.5, 0)` holds a flat queue while
/// `(0.5, 1)` oscillates, and the sub-critical pair `(0.8, 0.55)`
/// oscillates with at least 3 times the amplitude of the
/// super-critical pair `(1.3, 0.4)` at round-trip time 200.
///
/// All four runs share one protocol setting: 100 flows, unit capacity,
/// a 2.5x initial overload, rate recomputation every `tau / 50`, and a
/// `tau / 100` slot.
fn c11() -> Result<(bool, String)> {
    let run = |a: f64, beta: f64, tau: f64| -> Result<crate::packet::QueueStats> {
        let mut cfg = PacketSimConfig::new(100, 1.0, tau, a, beta, 1500.0 * tau);
        cfg.initial_rate = 2.5;
        cfg.update_interval = Some(tau / 50.0);
        cfg.slot = Some(tau / 100.0);
        let trace = run_packet_sim(&cfg)?;
        queue_stats(&trace, 0.3)
    };

    let flat = run(0.5, 0.0, 100.0)?;
    let cycling = run(0.5, 1.0, 100.0)?;
    let sub = run(0.8, 0.55, 200.0)?;
    let sup = run(1.3, 0.4, 200.0)?;

    let flat_ok = !flat.oscillating;
    let cycling_ok = cycling.oscillating;
    let ratio = sub.amplitude / sup.amplitude;
    let ratio_ok = sub.oscillating && ratio >= 3.0;
    Ok((
        flat_ok && cycling_ok && ratio_ok,
        format!(
            "(0.5, 0): amplitude {:.2}, oscillating {} ({flat_ok}); (0.5, 1): amplitude {:.1}, \
             oscillating {} ({cycling_ok}); amplitude (0.8, 0.55) = {:.1} vs (1.3, 0.4) = \
             {:.1}, ratio {ratio:.1} (>= 3: {ratio_ok})",
            flat.amplitude,
            flat.oscillating,
            cycling.amplitude,
            cycling.oscillating,
            sub.amplitude,
            sup.amplitude
        ),
    ))
}

/// Criterion 12: internal algebra guards of the normal-form pipeline:
/// `g11` vanishes to `1e-12`, the compact and coefficient-assembled
/// Lyapunov coefficients agree to `1e-8` along the bifurcation curve,
/// the crossing speed is positive over the angle range, and the
/// transversality sign is positive on a 10 x 10 gain grid.
fn c12() -> Result<(bool, String)> {
    let mut g11_max = 0.0f64;
    let mut c1_gap_max = 0.0f64;
    for i in 0..5 {
        let a = 0.3 + 0.3 * i as f64; // 0.3 .. 1.5 across the curve
        let beta = stability_boundary_beta(a)?;
        let report = hopf_report(a, beta, 1.0, 1.0)?;
        let g = &report.intermediates;
        g11_max = g11_max.max(g.g11.norm());
        // Reassemble c1 from the published coefficient combination and
        // compare with the compact closed form the report carries.
        let omega0 = report.omega0;
        let from_g = Complex64::i() / (2.0 * omega0)
            * (g.g20 * g.g11 - 2.0 * g.g11.norm_sqr() - g.g02.norm_sqr() / 3.0)
            + g.g21 / 2.0;
        c1_gap_max = c1_gap_max.max((from_g - report.c1).norm());
    }
    let g11_ok = g11_max <= 1e-12;
    let c1_ok = c1_gap_max <= 1e-8;

    let mut alpha_min = f64::INFINITY;
    for k in 0..31 {
        let theta = 0.05 + k as f64 * (1.55 - 0.05) / 30.0;
        alpha_min = alpha_min.min(crate::hopf::alpha_prime(theta, 1.0, 1.0)?);
    }
    let alpha_ok = alpha_min > 0.0;

    let mut trans_min = f64::INFINITY;
    for i in 0..10 {
        let a = (i + 1) as f64 * FRAC_PI_2 / 11.0;
        for j in 0..10 {
            let beta = j as f64 / 9.0;
            trans_min = trans_min.min(transversality_sign(a, beta)?);
        }
    }
    let trans_ok = trans_min > 0.0;

    Ok((
        g11_ok && c1_ok && alpha_ok && trans_ok,
        format!(
            "max |g11| = {g11_max:.2e} ({g11_ok}); max two-path c1 gap = {c1_gap_max:.2e} \
             ({c1_ok}); min crossing speed = {alpha_min:.4} ({alpha_ok}); min transversality \
             = {trans_min:.4} ({trans_ok})"
        ),
    ))
}

/// Criterion 13: halving the integrator step on the stable reference
/// case shrinks the end-state error by at least 8x (the integrator is
/// fourth order, so the expected factor is about 16).
fn c13() -> Result<(bool, String)> {
    let p = ProtocolParams::new(0.3, 0.1, 1.0, 1.0).with_kappa(0.9);
    let ic = InitialCondition { r0: 1.2, q0: 0.0 };
    let end_state = |steps: usize| -> Result<(f64, f64)> {
        let traj = simulate(&p, &ic, &SimConfig::new(20.0, steps))?;
        Ok((
            *traj.r_values.last().expect("non-empty"),
            *traj.q_values.last().expect("non-empty"),
        ))
    };
    let reference = end_state(512)?;
    let error = |state: (f64, f64)| (state.0 - reference.0).abs() + (state.1 - reference.1).abs();
    let e_coarse = error(end_state(32)?);
    let e_fine = error(end_state(64)?);
    let ratio = e_coarse / e_fine;
    Ok((
        ratio >= 8.0,
        format!(
            "end-state error {e_coarse:.3e} at tau/32 vs {e_fine:.3e} at tau/64: ratio \
             {ratio:.1} (need >= 8)"
        ),
    ))
}
