//! Chebyshev collocation of the linearised delay system, used to seed the
//! characteristic-root search.
//!
//! The linearisation about the equilibrium, in delay-normalised time
//! `t' = t / tau` and with the queue scaled as `y = q / tau`, reads
//!
//! ```text
//!   x'(t') = -kappa a x(t' - 1) - kappa beta y(t')
//!   y'(t') =  kappa   x(t' - 1)
//! ```
//!
//! so its characteristic roots are `s = lambda tau`. Approximating the
//! solution segment on `[-1, 0]` by its values at `N + 1` Chebyshev
//! points turns the infinitesimal generator of the solution semigroup
//! into a matrix: differentiation rows at the interior and history nodes,
//! and the delay equation itself at the `t' = 0` node. The matrix
//! eigenvalues approximate the rightmost characteristic roots, with
//! accuracy that improves spectrally in `N`; a Newton polish against the
//! exact characteristic function is applied downstream.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Chebyshev points mapped to `[-1, 0]` (first node is `t = 0`, last is
/// `t = -1`) and the differentiation matrix acting on values at those
/// nodes.
pub(crate) fn chebyshev_diff(n: usize) -> (Vec<f64>, DMatrix<f64>) {
    assert!(n >= 2, "need at least three collocation nodes");
    let nf = n as f64;
    let x: Vec<f64> = (0..=n)
        .map(|j| (std::f64::consts::PI * j as f64 / nf).cos())
        .collect();
    // Endpoint weights 2, interior weights 1, alternating signs.
    let c = |j: usize| -> f64 {
        let base = if j == 0 || j == n { 2.0 } else { 1.0 };
        if j % 2 == 0 {
            base
        } else {
            -base
        }
    };
    let mut d = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                d[(i, j)] = c(i) / c(j) / (x[i] - x[j]);
            }
        }
    }
    // Negative-sum trick: the diagonal absorbs the row sum so constants
    // differentiate to exactly zero.
    for i in 0..=n {
        let mut row_sum = 0.0;
        for j in 0..=n {
            if i != j {
                row_sum += d[(i, j)];
            }
        }
        d[(i, i)] = -row_sum;
    }
    // Map x in [-1, 1] to t = (x - 1) / 2 in [-1, 0]; d/dt = 2 d/dx.
    let t: Vec<f64> = x.iter().map(|&xi| 0.5 * (xi - 1.0)).collect();
    (t, d * 2.0)
}

/// Extracts Newton seeds from a generator matrix: finite eigenvalues in
/// the closed upper half-plane, sorted by decreasing real part.
fn leading_upper_half(m: DMatrix<f64>, max_count: usize) -> Vec<Complex64> {
    let mut eigs: Vec<Complex64> = m
        .complex_eigenvalues()
        .iter()
        .copied()
        .filter(|e| e.re.is_finite() && e.im.is_finite() && e.im >= -1e-9)
        .collect();
    eigs.sort_by(|p, q| q.re.total_cmp(&p.re).then(q.im.total_cmp(&p.im)));
    eigs.truncate(max_count);
    eigs
}

/// Seeds for the planar system (queue feedback active, `beta > 0`).
pub(crate) fn planar_seeds(
    a: f64,
    beta: f64,
    kappa: f64,
    n_nodes: usize,
    max_count: usize,
) -> Vec<Complex64> {
    let (_, d) = chebyshev_diff(n_nodes);
    let dim = n_nodes + 1;
    let mut m = DMatrix::<f64>::zeros(2 * dim, 2 * dim);
    for i in 1..dim {
        for j in 0..dim {
            m[(i, j)] = d[(i, j)];
            m[(dim + i, dim + j)] = d[(i, j)];
        }
    }
    // Collocation row at t = 0 for each component: the delay equation.
    m[(0, dim - 1)] = -kappa * a; // x'(0) <- x(-1)
    m[(0, dim)] = -kappa * beta; //  x'(0) <- y(0)
    m[(dim, dim - 1)] = kappa; //    y'(0) <- x(-1)
    leading_upper_half(m, max_count)
}

/// Seeds for the scalar rate-only system (`beta = 0`).
pub(crate) fn scalar_seeds(a: f64, kappa: f64, n_nodes: usize, max_count: usize) -> Vec<Complex64> {
    let (_, d) = chebyshev_diff(n_nodes);
    let dim = n_nodes + 1;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for i in 1..dim {
        for j in 0..dim {
            m[(i, j)] = d[(i, j)];
        }
    }
    m[(0, dim - 1)] = -kappa * a;
    leading_upper_half(m, max_count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn differentiation_is_exact_on_low_degree_polynomials() {
        let (t, d) = chebyshev_diff(8);
        // p(t) = t^3 - 2t, p'(t) = 3t^2 - 2 on the mapped interval.
        let vals = nalgebra::DVector::from_iterator(9, t.iter().map(|&ti| ti * ti * ti - 2.0 * ti));
        let derivs = &d * vals;
        for (i, &ti) in t.iter().enumerate() {
            assert_abs_diff_eq!(derivs[i], 3.0 * ti * ti - 2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn nodes_span_minus_one_to_zero() {
        let (t, _) = chebyshev_diff(16);
        assert_abs_diff_eq!(t[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t[16], -1.0, epsilon = 1e-15);
        assert!(t.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn scalar_seeds_approximate_the_known_principal_root() {
        // a = 0.5, kappa = 1: rightmost root of s e^s + 0.5 is
        // W_0(-0.5) = -0.794024 + 0.770112 i (40-digit reference).
        let seeds = scalar_seeds(0.5, 1.0, 32, 4);
        let best = seeds
            .iter()
            .min_by(|p, q| {
                let dp = (*p - Complex64::new(-0.79402363234469, 0.77011175051038)).norm();
                let dq = (*q - Complex64::new(-0.79402363234469, 0.77011175051038)).norm();
                dp.total_cmp(&dq)
            })
            .copied()
            .unwrap();
        assert!(
            (best - Complex64::new(-0.79402363234469, 0.77011175051038)).norm() < 1e-6,
            "best seed {best} too far from reference"
        );
    }
}
