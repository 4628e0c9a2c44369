//! Argument grammar. Flag names follow the model's parameter symbols
//! spelled out (`--a`, `--beta`, `--cap`, `--tau`, `--kappa`).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "rcp",
    version,
    about = "Stability analysis and simulation of the RCP congestion-control fluid model",
    propagate_version = true
)]
pub struct Cli {
    /// Directory receiving output files and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,

    /// Reserved for future stochastic models; recorded in the manifest
    /// but otherwise unused (all current models are deterministic).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the fluid model and write the trajectory and a
    /// delay-embedding phase portrait.
    Simulate(SimulateArgs),
    /// Sweep the queue-gain stability boundary over a grid of rate
    /// gains.
    #[command(name = "stability-chart")]
    StabilityChart(StabilityChartArgs),
    /// Compute the rightmost characteristic roots at one parameter
    /// point.
    Spectrum(SpectrumArgs),
    /// Sweep the exponential rate of convergence over a rate-gain or
    /// queue-gain grid.
    Roc(RocArgs),
    /// Hopf normal-form report at one parameter pair, or a
    /// bifurcation-type sweep along the critical surface.
    Hopf(HopfArgs),
    /// Limit-cycle amplitude law for the rate-only loop, with optional
    /// simulation-measured amplitudes.
    Amplitude(AmplitudeArgs),
    /// Run the slotted packet-level simulator.
    #[command(name = "packet-sim")]
    PacketSim(PacketSimArgs),
    /// Run the full acceptance suite and print one pass/fail line per
    /// criterion.
    Repro,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Rate-mismatch gain a.
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    /// Queue-drain gain beta.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    /// Link capacity C.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub cap: f64,
    /// Round-trip time tau.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub tau: f64,
    /// Loop gain kappa.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub kappa: f64,
    /// Initial rate on [-tau, 0], as a fraction of capacity.
    #[arg(long, default_value_t = 1.1, allow_negative_numbers = true)]
    pub r0_factor: f64,
    /// Initial queue backlog.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub q0: f64,
    /// Integration horizon in time units.
    #[arg(long, default_value_t = 200.0, allow_negative_numbers = true)]
    pub horizon: f64,
    /// Integration steps per delay interval.
    #[arg(long, default_value_t = 32)]
    pub steps_per_delay: usize,
    /// Keep the backlog non-negative (real-buffer semantics) instead of
    /// the signed fluid backlog.
    #[arg(long)]
    pub clamp_queue: bool,
}

#[derive(Debug, Args)]
pub struct StabilityChartArgs {
    /// Lower edge of the rate-gain grid.
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    pub a_min: f64,
    /// Upper edge of the rate-gain grid.
    #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
    pub a_max: f64,
    /// Number of grid points (endpoints included).
    #[arg(long, default_value_t = 60)]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpectrumMethodArg {
    /// Chebyshev collocation seeds polished by Newton (any beta).
    Spectral,
    /// Lambert-W branch enumeration (exact route, beta = 0 only).
    LambertW,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Rate-mismatch gain a.
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    /// Queue-drain gain beta.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    /// Link capacity C.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub cap: f64,
    /// Round-trip time tau.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub tau: f64,
    /// Loop gain kappa.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub kappa: f64,
    /// How many rightmost roots to report.
    #[arg(long, default_value_t = 6)]
    pub n_roots: usize,
    /// Root-finding route.
    #[arg(long, value_enum, default_value_t = SpectrumMethodArg::Spectral)]
    pub method: SpectrumMethodArg,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    /// Single rate gain (one-row sweep), or the fixed rate gain of a
    /// beta sweep.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["a_min", "a_max"])]
    pub a: Option<f64>,
    /// Lower edge of a rate-gain sweep.
    #[arg(long, requires = "a_max", allow_negative_numbers = true)]
    pub a_min: Option<f64>,
    /// Upper edge of a rate-gain sweep.
    #[arg(long, requires = "a_min", allow_negative_numbers = true)]
    pub a_max: Option<f64>,
    /// Fixed queue gain of a rate-gain sweep (default 0: rate-only
    /// loop).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, conflicts_with_all = ["beta_min", "beta_max"])]
    pub beta: f64,
    /// Lower edge of a queue-gain sweep (requires --a).
    #[arg(long, requires_all = ["beta_max", "a"], allow_negative_numbers = true)]
    pub beta_min: Option<f64>,
    /// Upper edge of a queue-gain sweep (requires --a).
    #[arg(long, requires_all = ["beta_min", "a"], allow_negative_numbers = true)]
    pub beta_max: Option<f64>,
    /// Grid points in a sweep (endpoints included).
    #[arg(long, default_value_t = 60)]
    pub points: usize,
    /// Link capacity C.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub cap: f64,
    /// Round-trip time tau.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub tau: f64,
    /// Loop gain kappa.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub kappa: f64,
}

#[derive(Debug, Args)]
pub struct HopfArgs {
    /// Rate-mismatch gain a (single report; with --beta).
    #[arg(long, requires = "beta", allow_negative_numbers = true, conflicts_with_all = ["theta_min", "theta_max"])]
    pub a: Option<f64>,
    /// Queue-drain gain beta (single report; with --a).
    #[arg(long, requires = "a", allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Lower edge of a crossing-angle sweep along the critical surface.
    #[arg(long, requires = "theta_max", allow_negative_numbers = true)]
    pub theta_min: Option<f64>,
    /// Upper edge of a crossing-angle sweep.
    #[arg(long, requires = "theta_min", allow_negative_numbers = true)]
    pub theta_max: Option<f64>,
    /// Grid points in a sweep (endpoints included).
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// Link capacity C.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub cap: f64,
    /// Round-trip time tau.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub tau: f64,
}

#[derive(Debug, Args)]
pub struct AmplitudeArgs {
    /// Rate-mismatch gain a (the queue gain is zero in this law).
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    /// Link capacity C.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub cap: f64,
    /// Round-trip time tau.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub tau: f64,
    /// Smallest gain offset kappa - kappa_c in the sweep.
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    pub offset_min: f64,
    /// Largest gain offset kappa - kappa_c in the sweep.
    #[arg(long, default_value_t = 0.04, allow_negative_numbers = true)]
    pub offset_max: f64,
    /// Grid points in the sweep (endpoints included).
    #[arg(long, default_value_t = 7)]
    pub points: usize,
    /// How many grid points (spread evenly, largest offset included)
    /// also get a simulation-measured amplitude; 0 skips simulation.
    #[arg(long, default_value_t = 3)]
    pub measure: usize,
    /// Horizon of each measuring simulation, in time units; the cycle
    /// amplitude must be stationary over the final 30%.
    #[arg(long, default_value_t = 2500.0, allow_negative_numbers = true)]
    pub horizon: f64,
    /// Integration steps per delay interval in measuring simulations.
    #[arg(long, default_value_t = 32)]
    pub steps_per_delay: usize,
}

#[derive(Debug, Args)]
pub struct PacketSimArgs {
    /// Flat key=value scenario file; excludes all parameter flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Rate-mismatch gain a.
    #[arg(
        long,
        required_unless_present = "config",
        allow_negative_numbers = true
    )]
    pub a: Option<f64>,
    /// Queue-drain gain beta.
    #[arg(
        long,
        required_unless_present = "config",
        allow_negative_numbers = true
    )]
    pub beta: Option<f64>,
    /// Number of flows sharing the link.
    #[arg(long)]
    pub num_flows: Option<usize>,
    /// Link capacity C in packets per unit time.
    #[arg(long, allow_negative_numbers = true)]
    pub cap: Option<f64>,
    /// Common round-trip time tau.
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    /// Time between rate updates (default tau).
    #[arg(long, allow_negative_numbers = true)]
    pub update_interval: Option<f64>,
    /// Service-slot duration (default tau / 50).
    #[arg(long, allow_negative_numbers = true)]
    pub slot: Option<f64>,
    /// Simulated time span (default 100 tau).
    #[arg(long, allow_negative_numbers = true)]
    pub horizon: Option<f64>,
    /// Aggregate rate announced at t = 0 (default C).
    #[arg(long, allow_negative_numbers = true)]
    pub initial_rate: Option<f64>,
    /// Buffer size in packets (default unbounded).
    #[arg(long, allow_negative_numbers = true)]
    pub max_queue: Option<f64>,
    /// Also print tail queue statistics over this trailing fraction of
    /// the trace.
    #[arg(long, allow_negative_numbers = true)]
    pub stats_tail: Option<f64>,
}
