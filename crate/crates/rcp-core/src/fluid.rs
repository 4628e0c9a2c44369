//! Time-domain integration of the nonlinear fluid model.
//!
//! The delay system
//!
//! ```text
//!   dR/dt = kappa R / (C tau) * ( a (C - R(t - tau)) - beta q / tau )
//!   dq/dt = kappa ( R(t - tau) - C )
//! ```
//!
//! is integrated by the method of steps with classical RK4. The step is
//! an exact divisor of the delay (`h = tau / steps_per_delay`), so the
//! delayed argument of every stage falls either on a previous grid node
//! or exactly halfway between two nodes; the half-step values come from
//! cubic Hermite interpolation of the stored rate and its derivative.
//! Derivative discontinuities propagate from `t = 0` at multiples of
//! `tau`, which by construction are grid nodes, so the integrator keeps
//! its full fourth order. History is the constant `R(t) = r0` on
//! `[-tau, 0]`.
//!
//! The optional queue clamp models a real buffer: the backlog never goes
//! below zero, and at zero it only grows when arrivals exceed capacity.

use crate::error::{Error, Result};
use crate::params::{Equilibrium, ProtocolParams};

/// Constant-history initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialCondition {
    /// Rate on `[-tau, 0]`; must be finite and positive.
    pub r0: f64,
    /// Queue backlog at `t = 0`. Must be non-negative when the queue
    /// clamp is on.
    pub q0: f64,
}

/// Integrator configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// End of the integration window; the trajectory runs to the first
    /// grid node at or beyond it.
    pub horizon: f64,
    /// Steps per delay interval (`h = tau / steps_per_delay`); at least 4.
    pub steps_per_delay: usize,
    /// Keep the backlog non-negative (real-buffer semantics).
    pub clamp_queue: bool,
    /// Rate magnitude treated as numerical blow-up; defaults to
    /// `1e6 * C` when `None`. Must exceed the capacity.
    pub blowup_cap: Option<f64>,
}

impl SimConfig {
    /// Configuration with the queue clamp off and the default blow-up
    /// threshold.
    pub fn new(horizon: f64, steps_per_delay: usize) -> Self {
        SimConfig {
            horizon,
            steps_per_delay,
            clamp_queue: false,
            blowup_cap: None,
        }
    }

    /// Same configuration with real-buffer queue semantics.
    pub fn with_queue_clamp(mut self) -> Self {
        self.clamp_queue = true;
        self
    }
}

/// A computed trajectory on the integration grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Grid times, starting at 0, spaced by `step`.
    pub times: Vec<f64>,
    /// Rate at each grid time.
    pub r_values: Vec<f64>,
    /// Queue backlog at each grid time.
    pub q_values: Vec<f64>,
    /// Integration step `tau / steps_per_delay`.
    pub step: f64,
    /// Steps per delay interval the grid was built with.
    pub steps_per_delay: usize,
    /// Whether integration stopped early on blow-up or loss of
    /// positivity.
    pub diverged: bool,
    /// Time at which divergence was detected, if any. The trajectory is
    /// truncated there; a finite offending value is kept as the last
    /// sample, a non-finite one is not recorded.
    pub divergence_time: Option<f64>,
}

/// Qualitative verdict on a trajectory tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryVerdict {
    /// The tail sits within `1e-4 C` of the equilibrium.
    Converged,
    /// The tail oscillates with a stationary amplitude (half-tail
    /// amplitudes agree within 5%).
    SustainedOscillation {
        /// Half the peak-to-peak rate excursion over the tail.
        amplitude: f64,
    },
    /// Integration stopped early on blow-up.
    Diverged,
}

struct Rhs {
    a: f64,
    beta: f64,
    cap: f64,
    tau: f64,
    kappa: f64,
    clamp_queue: bool,
}

impl Rhs {
    /// Time derivatives `(dR/dt, dq/dt)` given the current state and the
    /// delayed rate.
    fn eval(&self, r: f64, q: f64, r_delayed: f64) -> (f64, f64) {
        let q_eff = if self.clamp_queue { q.max(0.0) } else { q };
        let dr = self.kappa * r / (self.cap * self.tau)
            * (self.a * (self.cap - r_delayed) - self.beta * q_eff / self.tau);
        let raw_dq = self.kappa * (r_delayed - self.cap);
        let dq = if self.clamp_queue && q <= 0.0 {
            raw_dq.max(0.0) // an empty buffer only fills
        } else {
            raw_dq
        };
        (dr, dq)
    }
}

/// Integrates the fluid model from a constant-history initial condition.
///
/// Fails fast on invalid parameters or configuration; divergence during
/// integration is not an error but is recorded on the returned
/// [`Trajectory`] (truncated at the divergence time).
pub fn simulate(p: &ProtocolParams, ic: &InitialCondition, cfg: &SimConfig) -> Result<Trajectory> {
    let p = crate::params::validate_params(p)?.into_inner();
    if !cfg.horizon.is_finite() || cfg.horizon <= 0.0 {
        return Err(Error::config(
            "horizon",
            format!("must be finite and > 0, got {}", cfg.horizon),
        ));
    }
    if cfg.steps_per_delay < 4 {
        return Err(Error::config(
            "steps_per_delay",
            format!(
                "need at least 4 steps per delay, got {}",
                cfg.steps_per_delay
            ),
        ));
    }
    let blowup = cfg.blowup_cap.unwrap_or(1e6 * p.cap);
    if !blowup.is_finite() || blowup <= p.cap {
        return Err(Error::config(
            "blowup_cap",
            format!(
                "must be finite and exceed the capacity {}, got {blowup}",
                p.cap
            ),
        ));
    }
    if !ic.r0.is_finite() || ic.r0 <= 0.0 {
        return Err(Error::domain(
            "r0",
            format!("initial rate must be finite and > 0, got {}", ic.r0),
        ));
    }
    if !ic.q0.is_finite() {
        return Err(Error::domain(
            "q0",
            format!("initial backlog must be finite, got {}", ic.q0),
        ));
    }
    if cfg.clamp_queue && ic.q0 < 0.0 {
        return Err(Error::domain(
            "q0",
            format!("clamped queue cannot start negative, got {}", ic.q0),
        ));
    }

    let m = cfg.steps_per_delay;
    let h = p.tau / m as f64;
    let n_steps = (cfg.horizon / h).ceil() as usize;
    let rhs = Rhs {
        a: p.a,
        beta: p.beta,
        cap: p.cap,
        tau: p.tau,
        kappa: p.kappa,
        clamp_queue: cfg.clamp_queue,
    };

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut r = Vec::with_capacity(n_steps + 1);
    let mut q = Vec::with_capacity(n_steps + 1);
    // Stored dR/dt at each node, for the Hermite half-step interpolant.
    let mut dr = Vec::with_capacity(n_steps + 1);

    times.push(0.0);
    r.push(ic.r0);
    q.push(ic.q0);
    dr.push(rhs.eval(ic.r0, ic.q0, ic.r0).0);

    // Delayed rate at node index `j` (negative = inside the constant
    // history) and at the midpoint of step `j`.
    let node = |r: &[f64], j: isize| -> f64 {
        if j < 0 {
            ic.r0
        } else {
            r[j as usize]
        }
    };
    let midpoint = |r: &[f64], dr: &[f64], j: isize| -> f64 {
        if j < 0 {
            ic.r0
        } else {
            let j = j as usize;
            // Cubic Hermite at the half step.
            0.5 * (r[j] + r[j + 1]) + h * (dr[j] - dr[j + 1]) / 8.0
        }
    };

    let mut diverged = false;
    let mut divergence_time = None;
    for idx in 0..n_steps {
        let j = idx as isize - m as isize;
        let rd_node = node(&r, j);
        let rd_mid = midpoint(&r, &dr, j);
        let rd_next = node(&r, j + 1);

        let (ri, qi) = (r[idx], q[idx]);
        let k1 = rhs.eval(ri, qi, rd_node);
        let k2 = rhs.eval(ri + 0.5 * h * k1.0, qi + 0.5 * h * k1.1, rd_mid);
        let k3 = rhs.eval(ri + 0.5 * h * k2.0, qi + 0.5 * h * k2.1, rd_mid);
        let k4 = rhs.eval(ri + h * k3.0, qi + h * k3.1, rd_next);
        let r_next = ri + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        let mut q_next = qi + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if cfg.clamp_queue {
            q_next = q_next.max(0.0);
        }
        let t_next = (idx + 1) as f64 * h;

        if !r_next.is_finite() || !q_next.is_finite() {
            diverged = true;
            divergence_time = Some(t_next);
            break;
        }
        if r_next.abs() > blowup || r_next <= 0.0 {
            // Keep the finite offending sample, then stop: the rate has
            // blown past the guard or left the positive-rate domain.
            if cfg.clamp_queue {
                q_next = q_next.max(0.0);
            }
            times.push(t_next);
            r.push(r_next);
            q.push(q_next);
            diverged = true;
            divergence_time = Some(t_next);
            break;
        }

        times.push(t_next);
        r.push(r_next);
        q.push(q_next);
        let jd = (idx + 1) as isize - m as isize;
        let rd = node(&r, jd);
        dr.push(rhs.eval(r_next, q_next, rd).0);
    }

    Ok(Trajectory {
        times,
        r_values: r,
        q_values: q,
        step: h,
        steps_per_delay: m,
        diverged,
        divergence_time,
    })
}

/// Delay-embedding pairs `(R(t), R(t - tau))` for every grid time
/// `t >= tau`.
///
/// The trajectory must have been integrated with delay `tau` (checked
/// against its grid) and must extend past `tau`. The result has exactly
/// `len - steps_per_delay` pairs.
pub fn phase_portrait(traj: &Trajectory, tau: f64) -> Result<Vec<(f64, f64)>> {
    crate::numeric::require_positive("tau", tau)?;
    let m = traj.steps_per_delay;
    let grid_delay = traj.step * m as f64;
    if (grid_delay - tau).abs() > 1e-9 * tau {
        return Err(Error::domain(
            "tau",
            format!("trajectory grid was built for delay {grid_delay}, not {tau}"),
        ));
    }
    if traj.r_values.len() <= m {
        return Err(Error::domain(
            "horizon",
            format!(
                "need a horizon beyond one delay to embed; trajectory ends at {:?}",
                traj.times.last()
            ),
        ));
    }
    Ok((m..traj.r_values.len())
        .map(|i| (traj.r_values[i], traj.r_values[i - m]))
        .collect())
}

/// Classifies the tail of a trajectory against the equilibrium.
///
/// `tail_fraction` of the samples (from the end) are examined. Verdicts:
/// within `1e-4 C` of `(R*, q*)` throughout the tail is `Converged`;
/// otherwise a stationary oscillation (half-tail amplitudes within 5%)
/// reports its amplitude; a tail that is still trending is an
/// [`Error::Inconclusive`]. A truncated (diverged) trajectory reports
/// `Diverged` regardless of its tail.
pub fn analyze_trajectory(
    traj: &Trajectory,
    eq: &Equilibrium,
    tail_fraction: f64,
) -> Result<TrajectoryVerdict> {
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(Error::domain(
            "tail_fraction",
            format!("must lie in (0, 1), got {tail_fraction}"),
        ));
    }
    if traj.diverged {
        return Ok(TrajectoryVerdict::Diverged);
    }
    let len = traj.r_values.len();
    let n_tail = ((len as f64 * tail_fraction).ceil() as usize).min(len);
    if n_tail < 8 {
        return Err(Error::Inconclusive(format!(
            "tail of {n_tail} samples is too short to classify"
        )));
    }
    let tail_r = &traj.r_values[len - n_tail..];
    let tail_q = &traj.q_values[len - n_tail..];

    let tol = 1e-4 * eq.r_star;
    let r_dev = tail_r
        .iter()
        .map(|r| (r - eq.r_star).abs())
        .fold(0.0f64, f64::max);
    let q_dev = tail_q
        .iter()
        .map(|q| (q - eq.q_star).abs())
        .fold(0.0f64, f64::max);
    // The backlog scales like rate * time; compare it at the same
    // relative tolerance on that scale.
    if r_dev <= tol && q_dev <= tol * traj.step * traj.steps_per_delay as f64 {
        return Ok(TrajectoryVerdict::Converged);
    }

    let amplitude_of = |xs: &[f64]| -> f64 {
        let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        0.5 * (max - min)
    };
    let half = n_tail / 2;
    let amp_front = amplitude_of(&tail_r[..half]);
    let amp_back = amplitude_of(&tail_r[half..]);
    let amp = amplitude_of(tail_r);
    let agree = (amp_front - amp_back).abs() <= 0.05 * amp_front.max(amp_back);
    if agree {
        Ok(TrajectoryVerdict::SustainedOscillation { amplitude: amp })
    } else {
        Err(Error::Inconclusive(format!(
            "tail amplitude still trending: first half {amp_front}, \
             second half {amp_back}"
        )))
    }
}
