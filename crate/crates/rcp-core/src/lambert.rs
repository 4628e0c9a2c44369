//! Complex Lambert-W evaluation for the branches needed by the delay
//! spectrum.
//!
//! With queue feedback disabled the linearised loop reduces to the scalar
//! delay equation `x'(t) = -(a kappa / tau) x(t - tau)`, whose
//! characteristic roots are exactly
//!
//! ```text
//!   lambda_k = W_k(-a kappa) / tau,        k = 0, -1, 1, -2, 2, ...
//! ```
//!
//! where `W_k` is branch `k` of the Lambert-W function (`w e^w = z`). This
//! module evaluates any branch at any nonzero complex argument by Halley
//! iteration from a branch-specific seed:
//!
//! - near the branch point `z = -1/e`, the Puiseux series in
//!   `p = sqrt(2 (e z + 1))` (with `-p` for branch -1);
//! - for small `|z|` on the principal branch, the Taylor series seed
//!   `z (1 - z)`;
//! - for branch -1 with small negative real `z`, the double-log seed
//!   `ln(-z) - ln(-ln(-z))`;
//! - otherwise the asymptotic seed `L1 - ln L1 + (ln L1)/L1` with
//!   `L1 = Ln z + 2 pi i k`.
//!
//! Results are verified a posteriori against the defining equation.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Iteration limit for the Halley refinement.
const MAX_ITER: usize = 100;
/// Step-size stopping tolerance, relative to `1 + |w|`.
const STEP_TOL: f64 = 1e-15;
/// A posteriori residual bound on `|w e^w - z|`, relative to `max(|z|, 1)`.
const RESIDUAL_TOL: f64 = 1e-12;

/// Evaluates branch `k` of the Lambert-W function at `z`.
///
/// Fails with [`Error::Domain`] for `z = 0` on branches other than the
/// principal one (where `W_0(0) = 0`), and with [`Error::Convergence`] if
/// the Halley iteration does not meet the residual target.
pub(crate) fn lambert_w(k: i32, z: Complex64) -> Result<Complex64> {
    if z.norm() == 0.0 {
        return if k == 0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Err(Error::domain(
                "z",
                format!("W_{k} has a logarithmic singularity at z = 0"),
            ))
        };
    }

    // `p^2 = 2 (e z + 1)` measures the distance to the branch point
    // z = -1/e shared by branches 0 and -1.
    let p_sq = 2.0 * (std::f64::consts::E * z + 1.0);
    if (k == 0 || k == -1) && p_sq.norm() < 1e-8 {
        // So close to the branch point that Halley's division by
        // f' ~ 0 is ill-conditioned; the truncated Puiseux series is
        // already accurate to ~|p|^4 < 1e-16 here.
        let p = if k == 0 { p_sq.sqrt() } else { -(p_sq.sqrt()) };
        return Ok(branch_point_series(p));
    }

    let w = halley(seed(k, z, p_sq), z)?;
    // Branch verification: from w e^w = z, every branch satisfies
    // Im(w) + arg(w) = arg(z) + 2 pi k exactly (standard convention).
    if branch_index(w, z, k) == k {
        return Ok(snap_real(w));
    }
    // The direct seed landed in a neighbouring basin (this happens for
    // moderate |z| near the negative axis, where no single expansion is
    // reliable). Re-derive the value by continuation along the ray
    // arg z = const from an asymptotically large argument, where the
    // branch seed is unambiguous; the ray never crosses a branch cut.
    let w = ray_continuation(k, z)?;
    if branch_index(w, z, k) == k {
        Ok(snap_real(w))
    } else {
        Err(Error::Convergence(format!(
            "Lambert-W iteration for z = {z} settled on branch \
             {} instead of {k}",
            branch_index(w, z, k)
        )))
    }
}

/// Tracks branch `k` from `|z| ~ e^2` (where the asymptotic seed is
/// reliable) down the ray of constant `arg z` to the requested argument,
/// re-polishing at each intermediate modulus.
fn ray_continuation(k: i32, z: Complex64) -> Result<Complex64> {
    const STEPS: i32 = 8;
    let start_norm = (std::f64::consts::E * std::f64::consts::E).max(4.0 * z.norm());
    let dir = z / z.norm();
    let z0 = dir * start_norm;
    let mut w = halley(asymptotic_seed(k, z0), z0)?;
    let ratio = (z.norm() / start_norm).powf(1.0 / f64::from(STEPS));
    for i in 1..=STEPS {
        let zi = if i == STEPS {
            z
        } else {
            dir * (start_norm * ratio.powi(i))
        };
        w = halley(w, zi)?;
    }
    Ok(w)
}

/// Rounds an almost-real result onto the real axis so downstream branch
/// logic is not at the mercy of the sign of a 1e-17 imaginary part.
fn snap_real(w: Complex64) -> Complex64 {
    if w.im.abs() <= 1e-12 * (1.0 + w.re.abs()) {
        Complex64::new(w.re, 0.0)
    } else {
        w
    }
}

/// Recovers the branch index of a converged value. On the real cut
/// (`w` real negative) `arg(w)` is ambiguous between `+pi` and `-pi`;
/// the requested branch's sign resolves the tie, which accepts the two
/// real branches (0 and -1) and still rejects genuinely wrong branches.
fn branch_index(w: Complex64, z: Complex64, requested: i32) -> i32 {
    let w = snap_real(w);
    let arg_w = if w.im == 0.0 && w.re < 0.0 {
        if requested >= 0 {
            std::f64::consts::PI
        } else {
            -std::f64::consts::PI
        }
    } else {
        w.arg()
    };
    let band = w.im + arg_w - z.arg();
    (band / (2.0 * std::f64::consts::PI)).round() as i32
}

/// Truncated Puiseux expansion of W about the branch point:
/// `W = -1 + p - p^2/3 + 11 p^3 / 72 + O(p^4)`.
fn branch_point_series(p: Complex64) -> Complex64 {
    Complex64::new(-1.0, 0.0) + p - p * p / 3.0 + p * p * p * (11.0 / 72.0)
}

/// Branch-specific starting point for the Halley iteration.
fn seed(k: i32, z: Complex64, p_sq: Complex64) -> Complex64 {
    match k {
        0 if p_sq.norm() < 0.5 => branch_point_series(p_sq.sqrt()),
        0 if z.norm() < 0.3 => z * (Complex64::new(1.0, 0.0) - z),
        -1 if p_sq.norm() < 0.5 => branch_point_series(-(p_sq.sqrt())),
        -1 if z.im == 0.0 && z.re > -0.28 && z.re < 0.0 => {
            // Real z in (-1/e, 0): W_-1 is real and behaves like a
            // nested logarithm as z -> 0^-.
            let l = (-z.re).ln();
            Complex64::new(l - (-l).ln(), 0.0)
        }
        _ => asymptotic_seed(k, z),
    }
}

/// The large-argument expansion `L1 - ln L1 + (ln L1)/L1` with
/// `L1 = Ln z + 2 pi i k`.
fn asymptotic_seed(k: i32, z: Complex64) -> Complex64 {
    let l1 = z.ln() + Complex64::new(0.0, 2.0 * std::f64::consts::PI * f64::from(k));
    let l2 = l1.ln();
    l1 - l2 + l2 / l1
}

/// Halley iteration on `f(w) = w e^w - z`.
fn halley(start: Complex64, z: Complex64) -> Result<Complex64> {
    let mut w = start;
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - z;
        let fp = ew * (w + 1.0);
        // Halley step: dw = f / (f' - f f'' / (2 f')), with
        // f'' = e^w (w + 2).
        let denom = fp - f * ew * (w + 2.0) / (2.0 * fp);
        if denom.norm() == 0.0 {
            break;
        }
        let dw = f / denom;
        w -= dw;
        if dw.norm() <= STEP_TOL * (1.0 + w.norm()) {
            break;
        }
    }
    let residual = (w * w.exp() - z).norm();
    if residual <= RESIDUAL_TOL * z.norm().max(1.0) {
        Ok(w)
    } else {
        Err(Error::Convergence(format!(
            "Lambert-W iteration for z = {z} stalled at residual {residual:.3e}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn w(k: i32, re: f64, im: f64) -> Complex64 {
        lambert_w(k, Complex64::new(re, im)).unwrap()
    }

    /// Reference values computed with 40-digit arbitrary-precision
    /// arithmetic.
    #[test]
    fn matches_reference_values_on_the_cut() {
        // z = -0.5 < -1/e: principal pair is complex.
        let w0 = w(0, -0.5, 0.0);
        assert_abs_diff_eq!(w0.re, -0.79402363234469, epsilon = 1e-12);
        assert_abs_diff_eq!(w0.im, 0.77011175051038, epsilon = 1e-12);

        let w1 = w(1, -0.5, 0.0);
        assert_abs_diff_eq!(w1.re, -2.7720690151531, epsilon = 1e-11);
        assert_abs_diff_eq!(w1.im, 7.4999430283419, epsilon = 1e-11);

        let w2 = w(2, -0.5, 0.0);
        assert_abs_diff_eq!(w2.re, -3.3533515988111, epsilon = 1e-11);
        assert_abs_diff_eq!(w2.im, 13.900449335277, epsilon = 1e-11);

        let w0b = w(0, -1.2, 0.0);
        assert_abs_diff_eq!(w0b.re, -0.19046298905768, epsilon = 1e-12);
        assert_abs_diff_eq!(w0b.im, 1.4392235352059, epsilon = 1e-12);
    }

    #[test]
    fn real_branches_left_of_the_branch_point() {
        // z = -(1/e - 0.01) e^... : use a = 1/e - 0.01, z = -a.
        let a = (-1.0f64).exp() - 0.01;
        let w0 = w(0, -a, 0.0);
        let wm1 = w(-1, -a, 0.0);
        assert_abs_diff_eq!(w0.re, -0.783229198981, epsilon = 1e-11);
        assert_abs_diff_eq!(w0.im, 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(wm1.re, -1.25349379137, epsilon = 1e-11);
        assert_abs_diff_eq!(wm1.im, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn conjugate_pair_just_right_of_the_branch_point() {
        let a = (-1.0f64).exp() + 0.01;
        let w0 = w(0, -a, 0.0);
        assert_abs_diff_eq!(w0.re, -0.982109383168, epsilon = 1e-11);
        assert_abs_diff_eq!(w0.im, 0.231257861818, epsilon = 1e-11);
        let wm1 = w(-1, -a, 0.0);
        assert_abs_diff_eq!(wm1.re, w0.re, epsilon = 1e-12);
        assert_abs_diff_eq!(wm1.im, -w0.im, epsilon = 1e-12);
    }

    #[test]
    fn branch_point_itself_returns_minus_one() {
        let z = Complex64::new(-(-1.0f64).exp(), 0.0);
        for k in [0, -1] {
            let val = lambert_w(k, z).unwrap();
            assert_abs_diff_eq!(val.re, -1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(val.im, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn defining_equation_holds_and_branches_stay_distinct() {
        for &z in &[
            Complex64::new(-0.05, 0.0),
            Complex64::new(-0.9, 0.0),
            Complex64::new(-2.5, 0.0),
            Complex64::new(1.0, 1.0),
            Complex64::new(-0.3, -0.4),
        ] {
            let values: Vec<Complex64> = (-3..=3).map(|k| lambert_w(k, z).unwrap()).collect();
            for (i, wv) in values.iter().enumerate() {
                let res = (wv * wv.exp() - z).norm();
                assert!(
                    res < 1e-12,
                    "branch {}, z = {z}: residual {res}",
                    i as i32 - 3
                );
                for other in &values[..i] {
                    assert!(
                        (wv - other).norm() > 0.1,
                        "branches collided at z = {z}: {wv} vs {other}"
                    );
                }
            }
        }
    }

    #[test]
    fn principal_branch_near_zero() {
        let wv = w(0, 0.01, 0.0);
        assert_abs_diff_eq!(wv.re, 0.009901473843595, epsilon = 1e-13);
        assert_eq!(w(0, 0.0, 0.0).norm(), 0.0);
        assert!(lambert_w(1, Complex64::new(0.0, 0.0)).is_err());
    }
}
