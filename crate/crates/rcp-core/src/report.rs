//! Plain-text output formats: CSV tables and flat key=value reports.
//!
//! Every writer formats floats through Rust's shortest round-trip
//! `Display`, so re-parsing a field with `str::parse::<f64>()` recovers
//! the bit-identical value and identical inputs always produce
//! byte-identical files. Column orders are fixed.

use std::fmt::Write as _;

use crate::convergence::ConvergenceReport;
use crate::fluid::Trajectory;
use crate::hopf::{Criticality, HopfReport};
use crate::packet::PacketTrace;
use crate::stability::Spectrum;

/// `t,R,q` rows of a fluid trajectory.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,R,q\n");
    for i in 0..traj.times.len() {
        let _ = writeln!(
            out,
            "{},{},{}",
            traj.times[i], traj.r_values[i], traj.q_values[i]
        );
    }
    out
}

/// `R,R_delayed` rows of a delay-embedding phase portrait.
pub fn phase_csv(pairs: &[(f64, f64)]) -> String {
    let mut out = String::from("R,R_delayed\n");
    for (r, r_delayed) in pairs {
        let _ = writeln!(out, "{r},{r_delayed}");
    }
    out
}

/// `re,im,residual` rows of a characteristic-root spectrum.
pub fn spectrum_csv(spectrum: &Spectrum) -> String {
    let mut out = String::from("re,im,residual\n");
    for (root, residual) in spectrum.roots.iter().zip(&spectrum.residuals) {
        let _ = writeln!(out, "{},{},{}", root.re, root.im, residual);
    }
    out
}

/// `a,beta_boundary` rows of the stability-region boundary curve.
pub fn boundary_csv(rows: &[(f64, f64)]) -> String {
    let mut out = String::from("a,beta_boundary\n");
    for (a, beta) in rows {
        let _ = writeln!(out, "{a},{beta}");
    }
    out
}

/// `a,sigma,branch,regime` rows of a decay-rate sweep.
pub fn convergence_csv(rows: &[(f64, ConvergenceReport)]) -> String {
    let mut out = String::from("a,sigma,branch,regime\n");
    for (a, report) in rows {
        let _ = writeln!(
            out,
            "{a},{},{},{}",
            report.sigma, report.binding_branch, report.regime
        );
    }
    out
}

/// `theta,mu2,beta2,classification` rows of a bifurcation-type sweep
/// along the critical surface.
pub fn hopf_sweep_csv(rows: &[(f64, f64, f64, Criticality)]) -> String {
    let mut out = String::from("theta,mu2,beta2,classification\n");
    for (theta, mu2, beta2, class) in rows {
        let _ = writeln!(out, "{theta},{mu2},{beta2},{class}");
    }
    out
}

/// `t,queue,rate,utilization` rows of a packet-level trace.
pub fn packet_csv(trace: &PacketTrace) -> String {
    let mut out = String::from("t,queue,rate,utilization\n");
    for i in 0..trace.times.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            trace.times[i], trace.queue_lengths[i], trace.fair_rates[i], trace.utilization[i]
        );
    }
    out
}

/// `kappa,amplitude_formula,amplitude_simulated` rows of the
/// limit-cycle amplitude law; the simulated column is left empty where
/// no measurement was made.
pub fn amplitude_csv(rows: &[(f64, f64, Option<f64>)]) -> String {
    let mut out = String::from("kappa,amplitude_formula,amplitude_simulated\n");
    for (kappa, formula, simulated) in rows {
        match simulated {
            Some(measured) => {
                let _ = writeln!(out, "{kappa},{formula},{measured}");
            }
            None => {
                let _ = writeln!(out, "{kappa},{formula},");
            }
        }
    }
    out
}

/// Flat `key=value` rendering of one bifurcation report, intermediates
/// included (complex quantities as `_re`/`_im` pairs).
pub fn hopf_report_text(report: &HopfReport) -> String {
    let mut out = String::new();
    let mut scalar = |key: &str, value: f64| {
        let _ = writeln!(out, "{key}={value}");
    };
    scalar("omega0", report.omega0);
    scalar("theta", report.theta);
    scalar("c1_re", report.c1.re);
    scalar("c1_im", report.c1.im);
    scalar("alpha_prime", report.alpha_prime);
    scalar("mu2", report.mu2);
    scalar("beta2", report.beta2);
    let _ = writeln!(out, "classification={}", report.classification);
    let inter = &report.intermediates;
    let mut complex = |key: &str, value: num_complex::Complex64| {
        let _ = writeln!(out, "{key}_re={}", value.re);
        let _ = writeln!(out, "{key}_im={}", value.im);
    };
    complex("normalization", inter.normalization);
    complex("q02", inter.q02);
    complex("g20", inter.g20);
    complex("g11", inter.g11);
    complex("g02", inter.g02);
    complex("g21", inter.g21);
    complex("e_rate", inter.e[0]);
    complex("e_queue", inter.e[1]);
    complex("f_rate", inter.f[0]);
    complex("f_queue", inter.f[1]);
    complex("a1", inter.a1);
    complex("a2", inter.a2);
    complex("w20_rate_at_zero", inter.w20_at_zero[0]);
    complex("w20_queue_at_zero", inter.w20_at_zero[1]);
    complex("w20_rate_at_minus_tau", inter.w20_at_minus_tau[0]);
    complex("w20_queue_at_minus_tau", inter.w20_at_minus_tau[1]);
    complex("w11_rate", inter.w11[0]);
    complex("w11_queue", inter.w11[1]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluid::{simulate, InitialCondition, SimConfig};
    use crate::hopf::hopf_report;
    use crate::packet::{run_packet_sim, PacketSimConfig};
    use crate::params::ProtocolParams;
    use crate::stability::rightmost_roots;
    use crate::validate_params;

    #[test]
    fn headers_match_the_contracts() {
        assert!(trajectory_csv(&empty_trajectory()).starts_with("t,R,q\n"));
        assert!(phase_csv(&[]).starts_with("R,R_delayed\n"));
        assert!(boundary_csv(&[]).starts_with("a,beta_boundary\n"));
        assert!(convergence_csv(&[]).starts_with("a,sigma,branch,regime\n"));
        assert!(hopf_sweep_csv(&[]).starts_with("theta,mu2,beta2,classification\n"));
        assert!(amplitude_csv(&[]).starts_with("kappa,amplitude_formula,amplitude_simulated\n"));
    }

    fn empty_trajectory() -> Trajectory {
        Trajectory {
            times: vec![],
            r_values: vec![],
            q_values: vec![],
            step: 0.1,
            steps_per_delay: 10,
            diverged: false,
            divergence_time: None,
        }
    }

    #[test]
    fn fields_round_trip_through_display() {
        let x = 0.1f64 + 0.2f64; // not exactly the decimal it prints as
        let y = std::f64::consts::PI / 3.0;
        let csv = boundary_csv(&[(x, y)]);
        let line = csv.lines().nth(1).unwrap();
        let mut fields = line.split(',');
        let back_x: f64 = fields.next().unwrap().parse().unwrap();
        let back_y: f64 = fields.next().unwrap().parse().unwrap();
        assert_eq!(back_x, x);
        assert_eq!(back_y, y);
    }

    #[test]
    fn trajectory_rows_align_with_the_grid() {
        let params = validate_params(&ProtocolParams::new(0.3, 0.1, 10.0, 1.0)).unwrap();
        let traj = simulate(
            &params,
            &InitialCondition { r0: 11.0, q0: 0.0 },
            &SimConfig::new(3.0, 8),
        )
        .unwrap();
        let csv = trajectory_csv(&traj);
        assert_eq!(csv.lines().count(), traj.times.len() + 1);
        let last = csv.lines().last().unwrap();
        assert_eq!(last.split(',').count(), 3);
    }

    #[test]
    fn spectrum_rows_carry_residuals() {
        let params = validate_params(&ProtocolParams::new(1.5, 0.1, 1.0, 1.0)).unwrap();
        let spectrum = rightmost_roots(&params, 3).unwrap();
        let csv = spectrum_csv(&spectrum);
        assert!(csv.starts_with("re,im,residual\n"));
        assert_eq!(csv.lines().count(), spectrum.roots.len() + 1);
        for line in csv.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 3);
            let residual: f64 = fields[2].parse().unwrap();
            assert!(residual < 1e-10);
        }
    }

    #[test]
    fn packet_rows_have_four_columns() {
        let cfg = PacketSimConfig::new(10, 100.0, 1.0, 0.3, 0.1, 15.0);
        let trace = run_packet_sim(&cfg).unwrap();
        let csv = packet_csv(&trace);
        assert!(csv.starts_with("t,queue,rate,utilization\n"));
        assert_eq!(csv.lines().count(), trace.times.len() + 1);
        assert!(csv.lines().all(|l| l.split(',').count() == 4));
    }

    #[test]
    fn amplitude_csv_leaves_missing_measurements_empty() {
        let csv = amplitude_csv(&[(1.01, 0.29, None), (1.02, 0.41, Some(0.4))]);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[1].ends_with(','));
        assert_eq!(lines[2].split(',').count(), 3);
    }

    #[test]
    fn hopf_report_text_is_flat_key_value() {
        let report = hopf_report(0.75, 0.518, 1.0, 1.0).unwrap();
        let text = hopf_report_text(&report);
        for line in text.lines() {
            assert!(line.contains('='), "not key=value: {line:?}");
        }
        assert!(text.contains("classification=sub_critical"));
        let mu2_line = text
            .lines()
            .find(|l| l.starts_with("mu2="))
            .expect("mu2 present");
        let mu2: f64 = mu2_line.trim_start_matches("mu2=").parse().unwrap();
        assert!((mu2 - -0.1263).abs() < 1e-3);
    }
}
