//! Slotted packet-level simulator for the rate-control loop.
//!
//! Where the fluid model is a pair of differential equations, this
//! simulator moves packets through a single bottleneck queue in fixed
//! service slots — a deterministic fluid-packet hybrid:
//!
//! - The router announces one per-link fair rate `R`, split evenly over
//!   `num_flows` flows. Each slot, the flows together inject
//!   `rate * slot` worth of (fractional) packets, where the rate in
//!   force is the one announced a full round-trip time earlier: the
//!   announcement takes half an RTT to reach the sources, and their
//!   packets spend the other half in flight back to the queue. Because
//!   the flows are deterministic and identical, the flow count only
//!   fixes the per-flow share `R / num_flows` and does not alter the
//!   aggregate trace.
//! - The queue drains at capacity: `q <- max(0, q + arrivals - C *
//!   slot)`, optionally capped at `max_queue` (tail drop).
//! - Alongside the physical queue the router tracks a virtual backlog
//!   `v <- v + arrivals - C * slot` — the same quantity without the
//!   floor, so idle capacity accumulates as credit. This is the state
//!   the control law actually integrates (a virtual-queue marker in the
//!   AQM sense); feeding back the physical queue instead would pin the
//!   loop to the empty-buffer floor and absorb every instability.
//! - Every `update_interval` the router re-computes `R` from the
//!   measured arrival rate `y` (trailing average over the interval) and
//!   the virtual backlog, an explicit-Euler step of the fluid law at
//!   loop gain 1:
//!
//! ```text
//!   R <- R * ( 1 + (T / tau) * ( a (C - y) - beta v / tau ) / C )
//! ```
//!
//! clamped to `[1e-6 C, 100 C]` so a deep overload saturates instead of
//! blowing up or driving the rate negative.
//!
//! Everything is f64 arithmetic in a fixed order with no randomness, so
//! a given configuration always reproduces the identical trace.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Configuration of one packet-level run.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketSimConfig {
    /// Number of flows sharing the link; at least 1.
    pub num_flows: usize,
    /// Link capacity in packets per unit time.
    pub cap: f64,
    /// Round-trip time.
    pub tau: f64,
    /// Rate-mismatch gain.
    pub a: f64,
    /// Queue-drain gain.
    pub beta: f64,
    /// Time between rate updates; defaults to `tau`.
    pub update_interval: Option<f64>,
    /// Service-slot duration; defaults to `tau / 50` and must not exceed
    /// `tau / 10`. Must divide both half the round-trip time and the
    /// update interval.
    pub slot: Option<f64>,
    /// Simulated time span; must exceed `10 tau`.
    pub horizon: f64,
    /// Per-link fair rate announced at `t = 0`.
    pub initial_rate: f64,
    /// Buffer size in packets; `None` means unbounded.
    pub max_queue: Option<f64>,
}

impl PacketSimConfig {
    /// Configuration with default update interval (`tau`), default slot
    /// (`tau / 50`), an unbounded buffer, and the initial rate at
    /// capacity.
    pub fn new(num_flows: usize, cap: f64, tau: f64, a: f64, beta: f64, horizon: f64) -> Self {
        PacketSimConfig {
            num_flows,
            cap,
            tau,
            a,
            beta,
            update_interval: None,
            slot: None,
            horizon,
            initial_rate: cap,
            max_queue: None,
        }
    }
}

/// Per-slot record of one packet-level run.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketTrace {
    /// Slot start times.
    pub times: Vec<f64>,
    /// Backlog (packets) at each slot start.
    pub queue_lengths: Vec<f64>,
    /// Per-link fair rate announced by the router at each slot start.
    pub fair_rates: Vec<f64>,
    /// Fraction of the slot's service capacity actually used, in
    /// `[0, 1]`.
    pub utilization: Vec<f64>,
}

/// Tail statistics of the queue process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueStats {
    /// Mean backlog over the tail.
    pub mean: f64,
    /// Half the peak-to-peak backlog excursion over the tail.
    pub amplitude: f64,
    /// Whether the tail oscillates: stationary amplitude exceeding 5% of
    /// `mean + 1`.
    pub oscillating: bool,
}

/// Validated, slot-resolved configuration.
struct Resolved {
    cap: f64,
    tau: f64,
    a: f64,
    beta: f64,
    update: f64,
    slot: f64,
    initial_rate: f64,
    max_queue: Option<f64>,
    update_slots: usize,
    delay_slots: usize,
    n_slots: usize,
}

fn config_positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::config(
            field,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

fn resolve(cfg: &PacketSimConfig) -> Result<Resolved> {
    if cfg.num_flows < 1 {
        return Err(Error::config("num_flows", "need at least one flow"));
    }
    config_positive("C", cfg.cap)?;
    config_positive("tau", cfg.tau)?;
    config_positive("a", cfg.a)?;
    if !cfg.beta.is_finite() || cfg.beta < 0.0 {
        return Err(Error::config(
            "beta",
            format!("must be finite and >= 0, got {}", cfg.beta),
        ));
    }
    config_positive("initial_rate", cfg.initial_rate)?;
    if !cfg.horizon.is_finite() || cfg.horizon <= 10.0 * cfg.tau {
        return Err(Error::config(
            "horizon",
            format!(
                "must exceed 10 round-trip times ({}), got {}",
                10.0 * cfg.tau,
                cfg.horizon
            ),
        ));
    }
    let update = cfg.update_interval.unwrap_or(cfg.tau);
    config_positive("update_interval", update)?;
    let slot = cfg.slot.unwrap_or(cfg.tau / 50.0);
    config_positive("slot", slot)?;
    if slot > cfg.tau / 10.0 * (1.0 + 1e-12) {
        return Err(Error::config(
            "slot",
            format!("must not exceed tau/10 = {}, got {slot}", cfg.tau / 10.0),
        ));
    }
    let half_delay_slots = (cfg.tau / 2.0 / slot).round();
    if half_delay_slots < 1.0 || (half_delay_slots * slot - cfg.tau / 2.0).abs() > 1e-9 * cfg.tau {
        return Err(Error::config(
            "slot",
            format!(
                "must divide half the round-trip time {}, got {slot}",
                cfg.tau / 2.0
            ),
        ));
    }
    let update_slots = (update / slot).round();
    if update_slots < 1.0 || (update_slots * slot - update).abs() > 1e-9 * update {
        return Err(Error::config(
            "slot",
            format!("must divide the update interval {update}, got {slot}"),
        ));
    }
    if let Some(mq) = cfg.max_queue {
        config_positive("max_queue", mq)?;
    }
    Ok(Resolved {
        cap: cfg.cap,
        tau: cfg.tau,
        a: cfg.a,
        beta: cfg.beta,
        update,
        slot,
        initial_rate: cfg.initial_rate,
        max_queue: cfg.max_queue,
        update_slots: update_slots as usize,
        delay_slots: (2.0 * half_delay_slots) as usize, // full RTT
        n_slots: (cfg.horizon / slot).ceil() as usize,
    })
}

/// Runs the slotted simulator. Same configuration, same trace — the
/// simulator is deterministic by construction.
pub fn run_packet_sim(cfg: &PacketSimConfig) -> Result<PacketTrace> {
    let r = resolve(cfg)?;
    let rate_floor = 1e-6 * r.cap;
    let rate_ceil = 100.0 * r.cap;
    let service_per_slot = r.cap * r.slot;

    let mut announced: Vec<f64> = Vec::with_capacity(r.n_slots);
    let mut arrivals_per_slot: Vec<f64> = Vec::with_capacity(r.n_slots);

    let mut trace = PacketTrace {
        times: Vec::with_capacity(r.n_slots),
        queue_lengths: Vec::with_capacity(r.n_slots),
        fair_rates: Vec::with_capacity(r.n_slots),
        utilization: Vec::with_capacity(r.n_slots),
    };

    let mut rate = r.initial_rate;
    let mut queue = 0.0f64;
    let mut virtual_backlog = 0.0f64;
    for i in 0..r.n_slots {
        // Rate update at interval boundaries (not at t = 0): trailing
        // arrival average and virtual backlog feed the fluid law.
        if i > 0 && i % r.update_slots == 0 {
            let window = &arrivals_per_slot[i - r.update_slots..i];
            let y = window.iter().sum::<f64>() / r.update;
            let feedback = (r.a * (r.cap - y) - r.beta * virtual_backlog / r.tau) / r.cap;
            rate *= 1.0 + (r.update / r.tau) * feedback;
            rate = rate.clamp(rate_floor, rate_ceil);
        }
        announced.push(rate);

        // Sources transmit under the rate announced one RTT ago; before
        // the first announcement can have arrived, under the initial
        // rate.
        let applied = if i >= r.delay_slots {
            announced[i - r.delay_slots]
        } else {
            r.initial_rate
        };
        let arrivals = applied * r.slot;
        arrivals_per_slot.push(arrivals);

        trace.times.push(i as f64 * r.slot);
        trace.queue_lengths.push(queue);
        trace.fair_rates.push(rate);

        let after_service = (queue + arrivals - service_per_slot).max(0.0);
        let served = queue + arrivals - after_service;
        trace.utilization.push(served / service_per_slot);
        virtual_backlog += arrivals - service_per_slot;
        queue = match r.max_queue {
            Some(mq) => after_service.min(mq),
            None => after_service,
        };
    }
    Ok(trace)
}

/// Tail statistics of a packet trace's queue process.
///
/// Examines the trailing `tail_fraction` of slots. The oscillation flag
/// requires both a non-trivial amplitude (above 5% of `mean + 1`
/// packets) and stationarity (half-tail amplitudes within 20%); a large
/// but still-trending amplitude is reported as
/// [`Error::Inconclusive`].
pub fn queue_stats(trace: &PacketTrace, tail_fraction: f64) -> Result<QueueStats> {
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(Error::domain(
            "tail_fraction",
            format!("must lie in (0, 1), got {tail_fraction}"),
        ));
    }
    let len = trace.queue_lengths.len();
    let n_tail = ((len as f64 * tail_fraction).ceil() as usize).min(len);
    if n_tail < 8 {
        return Err(Error::Inconclusive(format!(
            "tail of {n_tail} slots is too short to classify"
        )));
    }
    let tail = &trace.queue_lengths[len - n_tail..];
    let mean = tail.iter().sum::<f64>() / n_tail as f64;
    let amplitude_of = |xs: &[f64]| -> f64 {
        let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        0.5 * (max - min)
    };
    let amplitude = amplitude_of(tail);
    let half = n_tail / 2;
    let amp_front = amplitude_of(&tail[..half]);
    let amp_back = amplitude_of(&tail[half..]);
    let stationary = (amp_front - amp_back).abs() <= 0.2 * amp_front.max(amp_back);
    let non_trivial = amplitude > 0.05 * (mean + 1.0);
    if non_trivial && !stationary {
        return Err(Error::Inconclusive(format!(
            "queue amplitude still trending: first half {amp_front}, \
             second half {amp_back}"
        )));
    }
    Ok(QueueStats {
        mean,
        amplitude,
        oscillating: non_trivial && stationary,
    })
}

/// Parses the flat `key=value` configuration format.
///
/// Recognised keys: `num_flows`, `C`, `tau`, `a`, `beta`,
/// `update_interval`, `slot`, `horizon`, `initial_rate`, `max_queue`.
/// Blank lines and `#` comments are ignored. Unknown, duplicated,
/// malformed, or missing-required keys are configuration errors naming
/// the key; value-range violations surface later, from
/// [`run_packet_sim`].
pub fn parse_packet_config(text: &str) -> Result<PacketSimConfig> {
    let mut seen: BTreeMap<&str, f64> = BTreeMap::new();
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config(
                "config",
                format!("line {}: expected key=value, got {line:?}", line_no + 1),
            ));
        };
        let key = key.trim();
        let value = value.trim();
        const KEYS: [&str; 10] = [
            "num_flows",
            "C",
            "tau",
            "a",
            "beta",
            "update_interval",
            "slot",
            "horizon",
            "initial_rate",
            "max_queue",
        ];
        let Some(&key) = KEYS.iter().find(|k| **k == key) else {
            return Err(Error::config(
                key,
                format!("unknown configuration key (line {})", line_no + 1),
            ));
        };
        if seen.contains_key(key) {
            return Err(Error::config(
                key,
                format!("duplicated (line {})", line_no + 1),
            ));
        }
        let parsed: f64 = if key == "num_flows" {
            let n: usize = value
                .parse()
                .map_err(|_| Error::config(key, format!("expected an integer, got {value:?}")))?;
            n as f64
        } else {
            value
                .parse()
                .map_err(|_| Error::config(key, format!("expected a number, got {value:?}")))?
        };
        seen.insert(key, parsed);
    }
    for required in [
        "num_flows",
        "C",
        "tau",
        "a",
        "beta",
        "horizon",
        "initial_rate",
    ] {
        if !seen.contains_key(required) {
            return Err(Error::config(required, "missing required key"));
        }
    }
    Ok(PacketSimConfig {
        num_flows: seen["num_flows"] as usize,
        cap: seen["C"],
        tau: seen["tau"],
        a: seen["a"],
        beta: seen["beta"],
        update_interval: seen.get("update_interval").copied(),
        slot: seen.get("slot").copied(),
        horizon: seen["horizon"],
        initial_rate: seen["initial_rate"],
        max_queue: seen.get("max_queue").copied(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> PacketSimConfig {
        let mut cfg = PacketSimConfig::new(100, 100.0, 1.0, 0.3, 0.1, 50.0);
        cfg.initial_rate = 130.0; // start away from the fixed point
        cfg
    }

    #[test]
    fn trace_invariants_hold() {
        let trace = run_packet_sim(&base_config()).unwrap();
        assert_eq!(trace.times.len(), 2500); // horizon / (tau/50)
        assert!(trace.queue_lengths.iter().all(|&q| q >= 0.0));
        assert!(trace.fair_rates.iter().all(|&r| r > 0.0));
        assert!(trace.utilization.iter().all(|&u| (0.0..=1.0).contains(&u)));
    }

    #[test]
    fn backlog_recurrence_is_exact() {
        let cfg = base_config();
        let trace = run_packet_sim(&cfg).unwrap();
        let slot = cfg.tau / 50.0;
        let service = cfg.cap * slot;
        let delay = 50; // full RTT in slots
        for i in delay..trace.times.len() - 1 {
            let arrivals = trace.fair_rates[i - delay] * slot;
            let expected = (trace.queue_lengths[i] + arrivals - service).max(0.0);
            assert!(
                (trace.queue_lengths[i + 1] - expected).abs() <= 1e-9 * (1.0 + expected),
                "slot {i}: queue {} != max(0, q + arrivals - service) = {expected}",
                trace.queue_lengths[i + 1]
            );
        }
    }

    #[test]
    fn stable_gains_settle_without_oscillation() {
        let mut cfg = base_config(); // a = 0.3, beta = 0.1: deep in the region
        cfg.horizon = 60.0;
        let trace = run_packet_sim(&cfg).unwrap();
        let stats = queue_stats(&trace, 0.25).unwrap();
        assert!(
            !stats.oscillating,
            "stable case flagged oscillating: {stats:?}"
        );
        // The loop settles onto a flat residual backlog well under one
        // bandwidth-delay product (C tau = 100 packets).
        assert!(stats.amplitude < 1.0, "tail amplitude {}", stats.amplitude);
        assert!(stats.mean < 100.0, "mean backlog {} too large", stats.mean);
        let n = trace.utilization.len();
        let rate_tail = trace.fair_rates[n - 500..].iter().sum::<f64>() / 500.0;
        assert!(
            (rate_tail - cfg.cap).abs() < 0.01 * cfg.cap,
            "tail rate {rate_tail} not near capacity"
        );
        let tail_util: f64 = trace.utilization[n - 500..].iter().sum::<f64>() / 500.0;
        assert!(tail_util > 0.9, "tail utilization {tail_util} too low");
    }

    #[test]
    fn unstable_gains_sustain_queue_oscillation() {
        // Queue feedback far past its stability edge: the backlog cycles
        // between flushes and multi-thousand-packet peaks.
        let mut cfg = PacketSimConfig::new(100, 100.0, 1.0, 0.5, 1.0, 2000.0);
        cfg.initial_rate = 110.0;
        let trace = run_packet_sim(&cfg).unwrap();
        let stats = queue_stats(&trace, 0.3).unwrap();
        assert!(
            stats.oscillating,
            "unstable case not oscillating: {stats:?}"
        );
        assert!(stats.amplitude > 100.0, "amplitude {}", stats.amplitude);
    }

    #[test]
    fn same_config_reproduces_the_identical_trace() {
        let a = run_packet_sim(&base_config()).unwrap();
        let b = run_packet_sim(&base_config()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn buffer_cap_limits_the_backlog() {
        let mut cfg = PacketSimConfig::new(100, 100.0, 1.0, 1.2, 0.45, 50.0);
        cfg.initial_rate = 180.0; // heavy initial overload
        let uncapped_max = run_packet_sim(&cfg)
            .unwrap()
            .queue_lengths
            .iter()
            .copied()
            .fold(0.0f64, f64::max);
        assert!(uncapped_max > 20.0);
        cfg.max_queue = Some(20.0);
        let trace = run_packet_sim(&cfg).unwrap();
        assert!(trace.queue_lengths.iter().all(|&q| q <= 20.0));
        assert!(trace.queue_lengths.contains(&20.0));
    }

    #[test]
    fn validation_names_offending_entries() {
        let mut cfg = base_config();
        cfg.horizon = 5.0; // <= 10 tau
        let err = run_packet_sim(&cfg).unwrap_err();
        assert!(err.to_string().contains("horizon"), "got: {err}");

        let mut cfg = base_config();
        cfg.slot = Some(0.3); // > tau / 10
        let err = run_packet_sim(&cfg).unwrap_err();
        assert!(err.to_string().contains("slot"), "got: {err}");

        let mut cfg = base_config();
        cfg.slot = Some(0.07); // does not divide tau / 2
        let err = run_packet_sim(&cfg).unwrap_err();
        assert!(err.to_string().contains("slot"), "got: {err}");

        let mut cfg = base_config();
        cfg.num_flows = 0;
        let err = run_packet_sim(&cfg).unwrap_err();
        assert!(err.to_string().contains("num_flows"), "got: {err}");
    }

    #[test]
    fn config_parser_round_trips() {
        let text = "\
# packet run
num_flows = 20
C = 50.0
tau = 2.0
a = 0.4
beta = 0.2
horizon = 100.0
initial_rate = 45.0
slot = 0.02
";
        let cfg = parse_packet_config(text).unwrap();
        assert_eq!(cfg.num_flows, 20);
        assert_eq!(cfg.cap, 50.0);
        assert_eq!(cfg.slot, Some(0.02));
        assert_eq!(cfg.update_interval, None);
        assert_eq!(cfg.max_queue, None);
        run_packet_sim(&cfg).unwrap();
    }

    #[test]
    fn config_parser_rejects_bad_input() {
        let err = parse_packet_config("num_flows = 10\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus"), "got: {err}");
        let err = parse_packet_config("num_flows = 10\nnum_flows = 12\n").unwrap_err();
        assert!(err.to_string().contains("num_flows"), "got: {err}");
        let err = parse_packet_config("num_flows = ten\n").unwrap_err();
        assert!(err.to_string().contains("integer"), "got: {err}");
        let err = parse_packet_config("num_flows = 10\n").unwrap_err();
        assert!(err.to_string().contains("missing"), "got: {err}");
        let err = parse_packet_config("what even is this\n").unwrap_err();
        assert!(err.to_string().contains("key=value"), "got: {err}");
    }
}
