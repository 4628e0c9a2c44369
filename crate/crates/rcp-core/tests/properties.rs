//! Property-based checks over randomly drawn parameters: algebraic
//! identities of the composite gain, spectral invariants, scaling laws,
//! simulator determinism, and text round-trips.

use proptest::prelude::*;
use rcp_core::convergence::decay_rate_no_queue;
use rcp_core::fluid::{analyze_trajectory, simulate, InitialCondition, SimConfig};
use rcp_core::packet::{run_packet_sim, PacketSimConfig};
use rcp_core::params::{equilibrium, validate_params};
use rcp_core::report::{packet_csv, spectrum_csv, trajectory_csv};
use rcp_core::stability::{
    hopf_kappa_c, is_locally_stable, rightmost_roots, stability_boundary_beta, theta,
};
use rcp_core::ProtocolParams;

proptest! {
    /// `theta` dominates `a`, grows with the queue gain, collapses to
    /// `a` without one, and satisfies its defining quartic
    /// `theta^4 - a^2 theta^2 - beta^2 = 0`.
    #[test]
    fn composite_gain_identities(a in 0.05f64..2.0, beta in 0.0f64..2.0) {
        let th = theta(a, beta).unwrap().theta;
        prop_assert!(th >= a);
        let th_more = theta(a, beta + 0.25).unwrap().theta;
        prop_assert!(th_more > th);
        prop_assert_eq!(theta(a, 0.0).unwrap().theta, a);
        let quartic = th.powi(4) - a * a * th * th - beta * beta;
        prop_assert!(quartic.abs() <= 1e-12 * th.powi(4).max(1.0));
    }

    /// The critical gain satisfies `sin(kappa_c theta) theta = a`, and
    /// local stability flips exactly there.
    #[test]
    fn critical_gain_separates_the_stability_verdicts(
        a in 0.1f64..1.5,
        beta in 0.0f64..1.5,
    ) {
        let th = theta(a, beta).unwrap().theta;
        let kc = hopf_kappa_c(a, beta).unwrap();
        prop_assert!(((kc * th).sin() * th - a).abs() <= 1e-12 * th.max(1.0));

        let just_inside = ProtocolParams::new(a, beta, 1.0, 1.0).with_kappa(kc * (1.0 - 1e-3));
        let just_outside = ProtocolParams::new(a, beta, 1.0, 1.0).with_kappa(kc * (1.0 + 1e-3));
        prop_assert!(is_locally_stable(&just_inside).unwrap());
        prop_assert!(!is_locally_stable(&just_outside).unwrap());
    }

    /// The boundary curve inverts the critical-gain map: on the curve
    /// the critical gain is exactly one.
    #[test]
    fn boundary_curve_inverts_the_critical_gain(a in 0.05f64..1.49) {
        let beta = stability_boundary_beta(a).unwrap();
        prop_assert!(beta >= 0.0);
        let kc = hopf_kappa_c(a, beta).unwrap();
        prop_assert!((kc - 1.0).abs() <= 1e-9, "kappa_c({a}, {beta}) = {kc}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Spectra come back residual-checked, ordered by decreasing real
    /// part, closed under conjugation (the final entry may be the upper
    /// half of a truncated pair), and agree with the closed-form
    /// stability verdict away from the boundary.
    #[test]
    fn spectra_are_ordered_conjugate_closed_and_consistent(
        a in 0.1f64..1.5,
        beta in 0.01f64..1.0,
        kappa in 0.3f64..1.2,
    ) {
        let kc = hopf_kappa_c(a, beta).unwrap();
        prop_assume!((kappa - kc).abs() > 1e-3);

        let p = ProtocolParams::new(a, beta, 1.0, 1.0).with_kappa(kappa);
        let spectrum = rightmost_roots(&p, 6).unwrap();
        prop_assert_eq!(spectrum.roots.len(), 6);

        for residual in &spectrum.residuals {
            prop_assert!(*residual < 1e-10);
        }
        for pair in spectrum.roots.windows(2) {
            prop_assert!(pair[0].re >= pair[1].re - 1e-12);
        }
        for (i, root) in spectrum.roots.iter().enumerate() {
            if root.im.abs() > 1e-8 && i + 1 < spectrum.roots.len() {
                let partner = spectrum
                    .roots
                    .iter()
                    .any(|r| (r - root.conj()).norm() < 1e-8 * (1.0 + root.norm()));
                prop_assert!(partner, "no conjugate for root {i}: {root}");
            }
        }

        let stable = is_locally_stable(&p).unwrap();
        prop_assert_eq!(stable, spectrum.rightmost().re < 0.0);
    }

    /// Without queue feedback the decay rate scales as `1 / tau`.
    #[test]
    fn decay_rate_scales_inversely_with_delay(
        a in 0.05f64..1.5,
        tau in 0.1f64..10.0,
    ) {
        let unit = decay_rate_no_queue(a, 1.0).unwrap();
        let scaled = decay_rate_no_queue(a, tau).unwrap();
        prop_assert!((scaled.sigma * tau - unit.sigma).abs() <= 1e-9 * unit.sigma.max(1.0));
        prop_assert_eq!(scaled.regime, unit.regime);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// The fluid integrator is deterministic, lays out the advertised
    /// grid, and keeps the rate positive on stable parameters.
    #[test]
    fn fluid_runs_are_deterministic_on_the_advertised_grid(
        a in 0.2f64..1.2,
        beta in 0.0f64..0.4,
        r0 in 0.6f64..1.4,
        clamp in any::<bool>(),
    ) {
        let kc = hopf_kappa_c(a, beta).unwrap();
        let p = ProtocolParams::new(a, beta, 1.0, 1.0).with_kappa((0.8 * kc).min(1.0));
        let ic = InitialCondition { r0, q0: 0.0 };
        let mut cfg = SimConfig::new(40.0, 16);
        if clamp {
            cfg = cfg.with_queue_clamp();
        }

        let t1 = simulate(&p, &ic, &cfg).unwrap();
        let t2 = simulate(&p, &ic, &cfg).unwrap();
        prop_assert_eq!(&t1, &t2);

        prop_assert_eq!(t1.step, p.tau / 16.0);
        for (i, t) in t1.times.iter().enumerate() {
            prop_assert!((t - i as f64 * t1.step).abs() <= 1e-12 * (1.0 + t));
        }
        prop_assert!(t1.r_values.iter().all(|r| *r > 0.0));
        if clamp {
            prop_assert!(t1.q_values.iter().all(|q| *q >= 0.0));
        }
    }

    /// Stable sub-critical runs converge to the capacity equilibrium.
    #[test]
    fn stable_fluid_runs_converge_to_capacity(
        a in 0.3f64..1.2,
        r0 in 0.8f64..1.2,
    ) {
        let kc = hopf_kappa_c(a, 0.1).unwrap();
        let p = ProtocolParams::new(a, 0.1, 1.0, 1.0).with_kappa((0.7 * kc).min(0.95));
        let ic = InitialCondition { r0, q0: 0.0 };
        let traj = simulate(&p, &ic, &SimConfig::new(400.0, 16)).unwrap();
        let eq = equilibrium(&validate_params(&p).unwrap());
        let verdict = analyze_trajectory(&traj, &eq, 0.25).unwrap();
        prop_assert_eq!(verdict, rcp_core::fluid::TrajectoryVerdict::Converged);
    }
}

fn packet_configs() -> impl Strategy<Value = PacketSimConfig> {
    (
        1usize..500,
        0.5f64..100.0,
        0.5f64..8.0,
        0.1f64..1.5,
        0.0f64..1.0,
        0.2f64..3.0,
        prop_oneof![Just(None), (1.0f64..100.0).prop_map(Some)],
        11.0f64..30.0,
    )
        .prop_map(
            |(num_flows, cap, tau, a, beta, rate_factor, max_queue, horizon_rtts)| {
                let mut cfg =
                    PacketSimConfig::new(num_flows, cap, tau, a, beta, horizon_rtts * tau);
                cfg.initial_rate = rate_factor * cap;
                cfg.max_queue = max_queue;
                cfg
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Packet traces respect buffer bounds, utilization limits, the slot
    /// grid, and rerun determinism on arbitrary valid configurations.
    #[test]
    fn packet_traces_hold_their_invariants(cfg in packet_configs()) {
        let trace = run_packet_sim(&cfg).unwrap();
        let n = trace.times.len();
        prop_assert!(n > 0);
        prop_assert_eq!(trace.queue_lengths.len(), n);
        prop_assert_eq!(trace.fair_rates.len(), n);
        prop_assert_eq!(trace.utilization.len(), n);

        let slot = cfg.tau / 50.0;
        for (i, t) in trace.times.iter().enumerate() {
            prop_assert!((t - i as f64 * slot).abs() <= 1e-9 * (1.0 + t));
        }
        for q in &trace.queue_lengths {
            prop_assert!(*q >= 0.0);
            if let Some(mq) = cfg.max_queue {
                prop_assert!(*q <= mq + 1e-9);
            }
        }
        for u in &trace.utilization {
            prop_assert!((0.0..=1.0 + 1e-12).contains(u));
        }
        for r in &trace.fair_rates {
            prop_assert!(*r >= 1e-6 * cfg.cap && *r <= 100.0 * cfg.cap);
        }

        prop_assert_eq!(&trace, &run_packet_sim(&cfg).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// CSV rows round-trip bit-identically through `str::parse::<f64>`.
    #[test]
    fn trajectory_csv_round_trips(
        a in 0.3f64..1.2,
        r0 in 0.8f64..1.3,
    ) {
        let p = ProtocolParams::new(a, 0.1, 1.0, 1.0).with_kappa(0.8);
        let traj = simulate(
            &p,
            &InitialCondition { r0, q0: 0.0 },
            &SimConfig::new(12.0, 8),
        )
        .unwrap();
        let csv = trajectory_csv(&traj);
        let mut lines = csv.lines();
        prop_assert_eq!(lines.next(), Some("t,R,q"));
        for (i, line) in lines.enumerate() {
            let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
            prop_assert_eq!(fields.len(), 3);
            prop_assert_eq!(fields[0], traj.times[i]);
            prop_assert_eq!(fields[1], traj.r_values[i]);
            prop_assert_eq!(fields[2], traj.q_values[i]);
        }
    }

    #[test]
    fn spectrum_csv_round_trips(
        a in 0.2f64..1.4,
        beta in 0.05f64..0.8,
    ) {
        let p = ProtocolParams::new(a, beta, 1.0, 1.0).with_kappa(1.0);
        let spectrum = rightmost_roots(&p, 4).unwrap();
        let csv = spectrum_csv(&spectrum);
        let mut lines = csv.lines();
        prop_assert_eq!(lines.next(), Some("re,im,residual"));
        for (i, line) in lines.enumerate() {
            let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
            prop_assert_eq!(fields.len(), 3);
            prop_assert_eq!(fields[0], spectrum.roots[i].re);
            prop_assert_eq!(fields[1], spectrum.roots[i].im);
            prop_assert_eq!(fields[2], spectrum.residuals[i]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn packet_csv_round_trips(cfg in packet_configs()) {
        let trace = run_packet_sim(&cfg).unwrap();
        let csv = packet_csv(&trace);
        let mut lines = csv.lines();
        prop_assert_eq!(lines.next(), Some("t,queue,rate,utilization"));
        for (i, line) in lines.enumerate() {
            let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
            prop_assert_eq!(fields.len(), 4);
            prop_assert_eq!(fields[0], trace.times[i]);
            prop_assert_eq!(fields[1], trace.queue_lengths[i]);
            prop_assert_eq!(fields[2], trace.fair_rates[i]);
            prop_assert_eq!(fields[3], trace.utilization[i]);
        }
    }
}
