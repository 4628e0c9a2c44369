//! Subcommand implementations. Each resolves its parameters, computes
//! its artifacts (fanning grid points out across the worker pool where
//! a sweep allows it), and hands back files for [`dispatch`] to write
//! along with the run manifest. Output rows always follow grid order,
//! never completion order.

use std::fmt::Display;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use rcp_core::convergence::{decay_rate_no_queue, decay_rate_with_queue, ConvergenceReport};
use rcp_core::fluid::{
    analyze_trajectory, phase_portrait, simulate, InitialCondition, SimConfig, TrajectoryVerdict,
};
use rcp_core::hopf::{amplitude_no_queue, hopf_report, surface_coefficients};
use rcp_core::packet::{parse_packet_config, queue_stats, run_packet_sim, PacketSimConfig};
use rcp_core::report::{
    amplitude_csv, boundary_csv, convergence_csv, hopf_report_text, hopf_sweep_csv, packet_csv,
    phase_csv, spectrum_csv, trajectory_csv,
};
use rcp_core::stability::{
    hopf_kappa_c, lambert_w_roots, rightmost_roots, stability_boundary_beta,
};
use rcp_core::{equilibrium, validate_params, Error, ProtocolParams, Result};

use crate::cli::{
    AmplitudeArgs, Cli, Command, HopfArgs, PacketSimArgs, RocArgs, SimulateArgs, SpectrumArgs,
    SpectrumMethodArg, StabilityChartArgs,
};
use crate::manifest::{write_output, RunManifest};

/// How a run finished, given that no error occurred.
pub enum Completion {
    /// Everything succeeded.
    Clean,
    /// The run completed but its checks reported failures (`repro`).
    ChecksFailed,
}

/// One command's computed results before anything touches the
/// filesystem.
#[derive(Default)]
struct Run {
    /// Resolved parameters for the manifest, in declaration order.
    params: Vec<(String, String)>,
    /// `(file name, contents)` pairs to write into the output
    /// directory.
    files: Vec<(&'static str, String)>,
    /// Human-readable result lines for stdout.
    notes: Vec<String>,
    /// Whether embedded checks failed (`repro` only).
    checks_failed: bool,
}

impl Run {
    fn param(&mut self, key: &str, value: impl Display) {
        self.params.push((key.to_string(), value.to_string()));
    }
}

pub fn dispatch(cli: Cli) -> Result<Completion> {
    let started = Instant::now();
    let (name, mut run) = match cli.command {
        Command::Simulate(args) => ("simulate", cmd_simulate(args)?),
        Command::StabilityChart(args) => ("stability-chart", cmd_stability_chart(args)?),
        Command::Spectrum(args) => ("spectrum", cmd_spectrum(args)?),
        Command::Roc(args) => ("roc", cmd_roc(args)?),
        Command::Hopf(args) => ("hopf", cmd_hopf(args)?),
        Command::Amplitude(args) => ("amplitude", cmd_amplitude(args)?),
        Command::PacketSim(args) => ("packet-sim", cmd_packet_sim(args)?),
        Command::Repro => ("repro", cmd_repro()?),
    };
    if let Some(seed) = cli.seed {
        run.params.push(("seed".to_string(), seed.to_string()));
    }

    let mut outputs = Vec::new();
    for (file_name, contents) in &run.files {
        outputs.push(write_output(&cli.out_dir, file_name, contents)?);
    }
    let manifest = RunManifest {
        subcommand: name,
        params: run.params,
        outputs: outputs.clone(),
        duration: started.elapsed(),
    };
    write_output(&cli.out_dir, &manifest.file_name(), &manifest.render())?;

    for note in &run.notes {
        println!("{note}");
    }
    for path in &outputs {
        println!("wrote {path}");
    }
    Ok(if run.checks_failed {
        Completion::ChecksFailed
    } else {
        Completion::Clean
    })
}

/// Inclusive evenly spaced grid; `points == 1` is allowed only for a
/// degenerate interval.
fn linspace(
    lo_name: &str,
    hi_name: &str,
    points_name: &str,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::config(points_name, "need at least one grid point"));
    }
    if !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(Error::config(
            hi_name,
            format!("need finite bounds with {hi_name} >= {lo_name}, got [{lo}, {hi}]"),
        ));
    }
    if points == 1 {
        if hi > lo {
            return Err(Error::config(
                points_name,
                format!("a single point cannot span [{lo}, {hi}]"),
            ));
        }
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| lo + step * i as f64).collect())
}

fn cmd_simulate(args: SimulateArgs) -> Result<Run> {
    let p = ProtocolParams::new(args.a, args.beta, args.cap, args.tau).with_kappa(args.kappa);
    let ic = InitialCondition {
        r0: args.r0_factor * args.cap,
        q0: args.q0,
    };
    let mut cfg = SimConfig::new(args.horizon, args.steps_per_delay);
    if args.clamp_queue {
        cfg = cfg.with_queue_clamp();
    }
    let traj = simulate(&p, &ic, &cfg)?;

    let mut run = Run::default();
    run.param("a", args.a);
    run.param("beta", args.beta);
    run.param("cap", args.cap);
    run.param("tau", args.tau);
    run.param("kappa", args.kappa);
    run.param("r0_factor", args.r0_factor);
    run.param("q0", args.q0);
    run.param("horizon", args.horizon);
    run.param("steps_per_delay", args.steps_per_delay);
    run.param("clamp_queue", args.clamp_queue);

    let last = traj.times.len() - 1;
    run.notes.push(format!(
        "final state: t={} R={} q={}",
        traj.times[last], traj.r_values[last], traj.q_values[last]
    ));
    if let Some(t) = traj.divergence_time {
        run.notes
            .push(format!("diverged at t={t}; trajectory truncated"));
    }

    run.files.push(("trajectory.csv", trajectory_csv(&traj)));
    match phase_portrait(&traj, args.tau) {
        Ok(pairs) => run.files.push(("phase.csv", phase_csv(&pairs))),
        // A run truncated inside the first delay has nothing to embed.
        Err(_) if traj.diverged => run
            .notes
            .push("trajectory too short for a phase portrait; skipped".to_string()),
        Err(e) => return Err(e),
    }
    Ok(run)
}

fn cmd_stability_chart(args: StabilityChartArgs) -> Result<Run> {
    let grid = linspace(
        "a-min",
        "a-max",
        "points",
        args.a_min,
        args.a_max,
        args.points,
    )?;
    let rows: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&a| stability_boundary_beta(a).map(|beta| (a, beta)))
        .collect::<Result<_>>()?;

    let mut run = Run::default();
    run.param("a_min", args.a_min);
    run.param("a_max", args.a_max);
    run.param("points", args.points);
    run.files.push(("stability_chart.csv", boundary_csv(&rows)));
    Ok(run)
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<Run> {
    let spectrum = match args.method {
        SpectrumMethodArg::Spectral => {
            let p =
                ProtocolParams::new(args.a, args.beta, args.cap, args.tau).with_kappa(args.kappa);
            rightmost_roots(&p, args.n_roots)?
        }
        SpectrumMethodArg::LambertW => {
            if args.beta != 0.0 {
                return Err(Error::config(
                    "method",
                    format!(
                        "the lambert-w route applies to the rate-only loop (beta = 0), \
                         got beta = {}",
                        args.beta
                    ),
                ));
            }
            lambert_w_roots(args.a, args.kappa, args.tau, args.n_roots)?
        }
    };

    let mut run = Run::default();
    run.param("a", args.a);
    run.param("beta", args.beta);
    run.param("cap", args.cap);
    run.param("tau", args.tau);
    run.param("kappa", args.kappa);
    run.param("n_roots", args.n_roots);
    run.param(
        "method",
        match args.method {
            SpectrumMethodArg::Spectral => "spectral",
            SpectrumMethodArg::LambertW => "lambert-w",
        },
    );
    let rightmost = spectrum.rightmost();
    run.notes.push(format!(
        "rightmost root: {}{}{}i ({})",
        rightmost.re,
        if rightmost.im < 0.0 { "" } else { "+" },
        rightmost.im,
        spectrum.method
    ));
    run.files.push(("spectrum.csv", spectrum_csv(&spectrum)));
    Ok(run)
}

/// Decay rate at one parameter point: the closed-form branch table for
/// the nominal rate-only loop, the computed spectrum otherwise.
fn decay_rate_at(a: f64, beta: f64, cap: f64, tau: f64, kappa: f64) -> Result<ConvergenceReport> {
    if beta == 0.0 && kappa == 1.0 {
        decay_rate_no_queue(a, tau)
    } else {
        decay_rate_with_queue(&ProtocolParams::new(a, beta, cap, tau).with_kappa(kappa))
    }
}

fn cmd_roc(args: RocArgs) -> Result<Run> {
    let mut run = Run::default();
    run.param("cap", args.cap);
    run.param("tau", args.tau);
    run.param("kappa", args.kappa);

    let csv = match (args.a, args.a_min, args.a_max, args.beta_min, args.beta_max) {
        // Rate-gain sweep at fixed queue gain.
        (None, Some(a_min), Some(a_max), None, None) => {
            let grid = linspace("a-min", "a-max", "points", a_min, a_max, args.points)?;
            run.param("a_min", a_min);
            run.param("a_max", a_max);
            run.param("beta", args.beta);
            run.param("points", args.points);
            let rows: Vec<(f64, ConvergenceReport)> = grid
                .par_iter()
                .map(|&a| {
                    decay_rate_at(a, args.beta, args.cap, args.tau, args.kappa)
                        .map(|report| (a, report))
                })
                .collect::<Result<_>>()?;
            convergence_csv(&rows)
        }
        // Queue-gain sweep at fixed rate gain.
        (Some(a), None, None, Some(beta_min), Some(beta_max)) => {
            let grid = linspace(
                "beta-min",
                "beta-max",
                "points",
                beta_min,
                beta_max,
                args.points,
            )?;
            run.param("a", a);
            run.param("beta_min", beta_min);
            run.param("beta_max", beta_max);
            run.param("points", args.points);
            let rows: Vec<(f64, ConvergenceReport)> = grid
                .par_iter()
                .map(|&beta| {
                    decay_rate_at(a, beta, args.cap, args.tau, args.kappa)
                        .map(|report| (beta, report))
                })
                .collect::<Result<_>>()?;
            let mut out = String::from("beta,sigma,branch,regime\n");
            for (beta, report) in &rows {
                let _ = writeln!(
                    out,
                    "{beta},{},{},{}",
                    report.sigma, report.binding_branch, report.regime
                );
            }
            out
        }
        // Single point.
        (Some(a), None, None, None, None) => {
            run.param("a", a);
            run.param("beta", args.beta);
            let report = decay_rate_at(a, args.beta, args.cap, args.tau, args.kappa)?;
            run.notes.push(format!(
                "sigma={} branch={} regime={}",
                report.sigma, report.binding_branch, report.regime
            ));
            convergence_csv(&[(a, report)])
        }
        _ => {
            return Err(Error::config(
                "a",
                "give --a for a single point, --a-min/--a-max for a rate-gain sweep, \
                 or --a with --beta-min/--beta-max for a queue-gain sweep",
            ))
        }
    };
    run.files.push(("roc.csv", csv));
    Ok(run)
}

fn cmd_hopf(args: HopfArgs) -> Result<Run> {
    let mut run = Run::default();
    run.param("cap", args.cap);
    run.param("tau", args.tau);

    match (args.a, args.beta, args.theta_min, args.theta_max) {
        (Some(a), Some(beta), None, None) => {
            run.param("a", a);
            run.param("beta", beta);
            let report = hopf_report(a, beta, args.cap, args.tau)?;
            run.notes.push(format!(
                "theta={} mu2={} beta2={} classification={}",
                report.theta, report.mu2, report.beta2, report.classification
            ));
            run.files
                .push(("hopf_report.txt", hopf_report_text(&report)));
        }
        (None, None, Some(theta_min), Some(theta_max)) => {
            let grid = linspace(
                "theta-min",
                "theta-max",
                "points",
                theta_min,
                theta_max,
                args.points,
            )?;
            run.param("theta_min", theta_min);
            run.param("theta_max", theta_max);
            run.param("points", args.points);
            let rows: Vec<_> = grid
                .par_iter()
                .map(|&theta| {
                    surface_coefficients(theta, args.cap, args.tau)
                        .map(|(mu2, beta2, class)| (theta, mu2, beta2, class))
                })
                .collect::<Result<_>>()?;
            run.files.push(("hopf_sweep.csv", hopf_sweep_csv(&rows)));
        }
        _ => {
            return Err(Error::config(
                "a",
                "give --a/--beta for a single report or --theta-min/--theta-max for a sweep",
            ))
        }
    }
    Ok(run)
}

/// Evenly spread sample of `measure` indices out of `points`, always
/// including the largest offset.
fn measured_indices(points: usize, measure: usize) -> Vec<usize> {
    if measure == 0 || points == 0 {
        return Vec::new();
    }
    if measure >= points {
        return (0..points).collect();
    }
    if measure == 1 {
        return vec![points - 1];
    }
    let mut indices: Vec<usize> = (0..measure)
        .map(|j| j * (points - 1) / (measure - 1))
        .collect();
    indices.dedup();
    indices
}

fn cmd_amplitude(args: AmplitudeArgs) -> Result<Run> {
    let kappa_c = hopf_kappa_c(args.a, 0.0)?;
    let offsets = linspace(
        "offset-min",
        "offset-max",
        "points",
        args.offset_min,
        args.offset_max,
        args.points,
    )?;

    let measured = measured_indices(offsets.len(), args.measure);
    let simulated: Vec<(usize, f64)> = measured
        .par_iter()
        .map(|&i| measure_amplitude(&args, kappa_c + offsets[i]).map(|amp| (i, amp)))
        .collect::<Result<_>>()?;

    let rows: Vec<(f64, f64, Option<f64>)> = offsets
        .iter()
        .enumerate()
        .map(|(i, &offset)| {
            let kappa = kappa_c + offset;
            let formula = amplitude_no_queue(kappa, kappa_c, args.cap)?;
            let measured = simulated.iter().find(|(j, _)| *j == i).map(|(_, amp)| *amp);
            Ok((kappa, formula, measured))
        })
        .collect::<Result<_>>()?;

    let mut run = Run::default();
    run.param("a", args.a);
    run.param("cap", args.cap);
    run.param("tau", args.tau);
    run.param("kappa_c", kappa_c);
    run.param("offset_min", args.offset_min);
    run.param("offset_max", args.offset_max);
    run.param("points", args.points);
    run.param("measure", args.measure);
    run.param("horizon", args.horizon);
    run.param("steps_per_delay", args.steps_per_delay);
    run.files.push(("amplitude.csv", amplitude_csv(&rows)));
    Ok(run)
}

/// Measures the stationary limit-cycle rate amplitude of the rate-only
/// loop at gain `kappa` from a long fluid run.
fn measure_amplitude(args: &AmplitudeArgs, kappa: f64) -> Result<f64> {
    let p = ProtocolParams::new(args.a, 0.0, args.cap, args.tau).with_kappa(kappa);
    let ic = InitialCondition {
        r0: 1.05 * args.cap,
        q0: 0.0,
    };
    let traj = simulate(&p, &ic, &SimConfig::new(args.horizon, args.steps_per_delay))?;
    let eq = equilibrium(&validate_params(&p)?);
    match analyze_trajectory(&traj, &eq, 0.3)? {
        TrajectoryVerdict::SustainedOscillation { amplitude } => Ok(amplitude),
        TrajectoryVerdict::Converged => Ok(0.0),
        TrajectoryVerdict::Diverged => Err(Error::Internal(format!(
            "measuring run at kappa = {kappa} diverged; the rate-only loop cannot"
        ))),
    }
}

fn cmd_packet_sim(args: PacketSimArgs) -> Result<Run> {
    let mut run = Run::default();
    let cfg = if let Some(path) = &args.config {
        let direct_flags_given = args.a.is_some()
            || args.beta.is_some()
            || args.num_flows.is_some()
            || args.cap.is_some()
            || args.tau.is_some()
            || args.update_interval.is_some()
            || args.slot.is_some()
            || args.horizon.is_some()
            || args.initial_rate.is_some()
            || args.max_queue.is_some();
        if direct_flags_given {
            return Err(Error::config(
                "config",
                "--config and the direct parameter flags are mutually exclusive",
            ));
        }
        run.param("config", path.display());
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        parse_packet_config(&text)?
    } else {
        // clap only guarantees --a/--beta when --config is absent.
        let tau = args.tau.unwrap_or(1.0);
        let mut cfg = PacketSimConfig::new(
            args.num_flows.unwrap_or(100),
            args.cap.unwrap_or(1.0),
            tau,
            args.a.expect("required unless --config"),
            args.beta.expect("required unless --config"),
            args.horizon.unwrap_or(100.0 * tau),
        );
        if args.update_interval.is_some() {
            cfg.update_interval = args.update_interval;
        }
        if args.slot.is_some() {
            cfg.slot = args.slot;
        }
        if let Some(rate) = args.initial_rate {
            cfg.initial_rate = rate;
        }
        cfg.max_queue = args.max_queue;
        cfg
    };

    run.param("num_flows", cfg.num_flows);
    run.param("cap", cfg.cap);
    run.param("tau", cfg.tau);
    run.param("a", cfg.a);
    run.param("beta", cfg.beta);
    match cfg.update_interval {
        Some(value) => run.param("update_interval", value),
        None => run.param("update_interval", format!("{} (default)", cfg.tau)),
    }
    match cfg.slot {
        Some(value) => run.param("slot", value),
        None => run.param("slot", format!("{} (default)", cfg.tau / 50.0)),
    }
    run.param("horizon", cfg.horizon);
    run.param("initial_rate", cfg.initial_rate);
    match cfg.max_queue {
        Some(value) => run.param("max_queue", value),
        None => run.param("max_queue", "unbounded"),
    }

    let trace = run_packet_sim(&cfg)?;
    if let Some(tail) = args.stats_tail {
        run.param("stats_tail", tail);
        let stats = queue_stats(&trace, tail)?;
        run.notes.push(format!(
            "tail queue: mean={} amplitude={} oscillating={}",
            stats.mean, stats.amplitude, stats.oscillating
        ));
    }
    run.files.push(("packet_trace.csv", packet_csv(&trace)));
    Ok(run)
}

fn cmd_repro() -> Result<Run> {
    let outcomes = rcp_core::acceptance::run_all();
    let failed = outcomes.iter().filter(|o| !o.passed).count();

    let mut report = String::new();
    for outcome in &outcomes {
        let _ = writeln!(report, "{}", outcome.render());
    }
    let _ = writeln!(
        report,
        "{} of {} criteria passed",
        outcomes.len() - failed,
        outcomes.len()
    );

    let mut run = Run::default();
    run.notes.extend(report.lines().map(str::to_string));
    run.files.push(("repro_results.txt", report));
    run.checks_failed = failed > 0;
    Ok(run)
}
