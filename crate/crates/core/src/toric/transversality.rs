use num_complex::Complex64;

use crate::delzant::DelzantData;

/// Behaviour of `s -> J_A(s^v · z)` paired with `v`, for `v in L_R`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransversalityReport {
    /// Some `v_i z_i` is nonzero (above `1e-9`).
    pub nontrivial: bool,
    pub g_at_one: f64,
    pub g_at_e: f64,
    /// Smallest `g'(s)` over the grid `s = e^t`, `t in [-2, 2]`.
    pub min_derivative: f64,
    pub max_derivative: f64,
    /// Largest relative gap between the closed form of `g'` and a central
    /// difference.
    pub derivative_fd_error: f64,
    /// `e^v · z` lies on the zero level (within `tol`).
    pub moved_on_level: bool,
    /// `e^v · z = z` (within `tol`).
    pub moved_is_fixed: bool,
    pub holds: bool,
}

const GRID: usize = 40;

/// `g(s) = Σ_i (½|z_i|^2 s^{2 v_i} + λ_i) v_i`.
fn g(lambda: &[f64], r2: &[f64], v: &[f64], s: f64) -> f64 {
    (0..v.len())
        .map(|i| (0.5 * r2[i] * s.powf(2.0 * v[i]) + lambda[i]) * v[i])
        .sum()
}

/// `g'(s) = (1/s) Σ_i |z_i|^2 s^{2 v_i} v_i^2`.
fn g_prime(r2: &[f64], v: &[f64], s: f64) -> f64 {
    (0..v.len())
        .map(|i| r2[i] * s.powf(2.0 * v[i]) * v[i] * v[i])
        .sum::<f64>()
        / s
}

/// Checks that the real `L_R`-orbit through a zero-level point `z` leaves
/// the zero level unless it fixes `z`.
pub fn transversality_check(
    d: &DelzantData,
    z: &[Complex64],
    v: &[f64],
    tol: f64,
) -> TransversalityReport {
    assert_eq!(z.len(), d.p());
    assert_eq!(v.len(), d.p());
    let lambda = d.lambda_f64();
    let r2: Vec<f64> = z.iter().map(|w| w.norm_sqr()).collect();
    let nontrivial = z.iter().zip(v).any(|(w, vi)| (w.norm() * vi.abs()) > 1e-9);

    let mut min_derivative = f64::INFINITY;
    let mut max_derivative = f64::NEG_INFINITY;
    let mut derivative_fd_error = 0.0f64;
    for k in 0..=GRID {
        let s = (-2.0 + 4.0 * k as f64 / GRID as f64).exp();
        let dg = g_prime(&r2, v, s);
        min_derivative = min_derivative.min(dg);
        max_derivative = max_derivative.max(dg);
        let h = 1e-5 * s;
        let fd = (g(lambda, &r2, v, s + h) - g(lambda, &r2, v, s - h)) / (2.0 * h);
        let scale = dg.abs().max(g(lambda, &r2, v, s).abs()).max(1.0);
        derivative_fd_error = derivative_fd_error.max((fd - dg).abs() / scale);
    }

    let e = std::f64::consts::E;
    let moved: Vec<Complex64> = z.iter().zip(v).map(|(w, vi)| w * vi.exp()).collect();
    let moved_on_level = d.relative_moment_a(&moved) <= tol;
    let zmax = z.iter().fold(1.0f64, |m, w| m.max(w.norm()));
    let moved_is_fixed = moved
        .iter()
        .zip(z)
        .all(|(a, b)| (a - b).norm() <= tol * zmax);

    let implication = !moved_on_level || moved_is_fixed;
    let derivative_ok = if nontrivial {
        min_derivative > 0.0
    } else {
        moved_is_fixed && max_derivative <= tol * zmax * zmax
    };
    TransversalityReport {
        nontrivial,
        g_at_one: g(lambda, &r2, v, 1.0),
        g_at_e: g(lambda, &r2, v, e),
        min_derivative,
        max_derivative,
        derivative_fd_error,
        moved_on_level,
        moved_is_fixed,
        holds: implication && derivative_ok && derivative_fd_error <= 1e-5,
    }
}
