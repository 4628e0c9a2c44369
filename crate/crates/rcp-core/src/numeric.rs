//! Small shared numerical utilities: scalar root bracketing and
//! unimodal maximisation.
//!
//! Everything here works on plain `f64 -> f64` closures. The heavier
//! machinery (complex Newton refinement, spectral discretisation) lives in
//! the modules that own it.

use crate::error::{Error, Result};

/// Relative interval width at which bisection stops.
const BISECT_REL_TOL: f64 = 1e-15;
/// Hard cap on bisection iterations; 200 halvings exhaust f64 resolution
/// on any bracket many times over.
const BISECT_MAX_ITER: usize = 200;

/// Finds a root of `f` inside `[lo, hi]` by bisection.
///
/// Requires `f(lo)` and `f(hi)` to have opposite (or zero) signs; returns
/// [`Error::Convergence`] otherwise. The result is accurate to a relative
/// interval width of about `1e-15`, i.e. essentially machine precision.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::Convergence(format!(
            "bisection bracket [{lo}, {hi}] does not straddle a sign change \
             (f(lo) = {f_lo}, f(hi) = {f_hi})"
        )));
    }
    let falling = f_lo > 0.0;
    for _ in 0..BISECT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval no longer representable
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid > 0.0) == falling {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= BISECT_REL_TOL * hi.abs().max(lo.abs()).max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Locates the maximiser of a unimodal function on `[lo, hi]` by
/// golden-section search, to an interval width of about `1e-10`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (lo, hi);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > 1e-10 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Checks that `value` is finite and strictly positive, naming `field` in
/// the error otherwise.
pub(crate) fn require_positive(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(
            field,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

/// Checks that `value` is finite and non-negative, naming `field` in the
/// error otherwise.
pub(crate) fn require_non_negative(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(
            field,
            format!("must be finite and >= 0, got {value}"),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt_two() {
        let root = bisect(|x| x * x - 2.0, 0.0, 2.0).unwrap();
        assert!((root - std::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn bisect_accepts_falling_functions() {
        let root = bisect(|x| 2.0 - x * x, 0.0, 2.0).unwrap();
        assert!((root - std::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn bisect_rejects_bad_bracket() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn golden_max_finds_parabola_vertex() {
        let x = golden_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0);
        assert!((x - 0.3).abs() < 1e-9);
    }
}
