//! Shared oracles for the integration tests. Everything here is derived
//! independently of the library's solver paths: closed forms for the free
//! potential matched through the transfer condition, and the textbook
//! transcendental equations for the square well.
#![allow(dead_code)] // each test binary uses its own subset

use num_complex::Complex64;
use scatterline::{PotentialGrid, TransferMatrix};

/// Closed-form scattering coefficients for `q = 0`: the left solution
/// `e^{-i xi x}` is pushed through the matrix at the origin and matched
/// against the exponential basis, with the sign convention fixed by the
/// large-frequency form of B.
pub fn free_ab(m: &TransferMatrix, xi: f64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let a = Complex64::new(0.5 * (m.m11() + m.m22()), 0.0) - i * (0.5 * xi * m.m12())
        + i * (m.m21() / (2.0 * xi));
    let b = Complex64::new(0.5 * (m.m22() - m.m11()), 0.0)
        + i * (0.5 * xi * m.m12())
        + i * (m.m21() / (2.0 * xi));
    (a, b)
}

/// Free solution with data `(y0, yp0)` at `x0`, evaluated at `x`:
/// decomposition into `alpha e^{i zeta x} + beta e^{-i zeta x}`.
pub fn free_evolve(
    y0: Complex64,
    yp0: Complex64,
    x0: f64,
    x: f64,
    zeta: Complex64,
) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let alpha = 0.5 * (y0 + yp0 / (i * zeta)) * (-i * zeta * x0).exp();
    let beta = 0.5 * (y0 - yp0 / (i * zeta)) * (i * zeta * x0).exp();
    let ep = (i * zeta * x).exp();
    let em = (-i * zeta * x).exp();
    (alpha * ep + beta * em, i * zeta * (alpha * ep - beta * em))
}

/// Bound states of the square well `q = -v0` on `[-a, a]` (no transfer):
/// roots of the textbook even/odd transcendental equations, returned as
/// increasing `eta` values.
pub fn square_well_etas(v0: f64, a: f64) -> Vec<f64> {
    let kmax = v0.sqrt();
    let eta = |k: f64| (v0 - k * k).sqrt();
    // even: k tan(k a) = eta; odd: -k cot(k a) = eta
    let f_even = |k: f64| k * (k * a).tan() - eta(k);
    let f_odd = |k: f64| -k / (k * a).tan() - eta(k);
    let mut out = Vec::new();
    for parity in 0..2 {
        let f: &dyn Fn(f64) -> f64 = if parity == 0 { &f_even } else { &f_odd };
        // scan k avoiding the tangent poles
        let n = 20_000;
        let mut prev: Option<(f64, f64)> = None;
        for j in 1..n {
            let k = kmax * j as f64 / n as f64;
            let v = f(k);
            if !v.is_finite() {
                prev = None;
                continue;
            }
            if let Some((kp, vp)) = prev {
                if vp * v < 0.0 && (v - vp).abs() < 1e3 {
                    let (mut lo, mut hi) = (kp, k);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if f(lo) * f(mid) <= 0.0 {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    out.push(eta(0.5 * (lo + hi)));
                }
            }
            prev = Some((k, v));
        }
    }
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out
}

/// Smooth compactly supported bump `amp * exp(1 - 1/(1 - (x/r)^2))`,
/// sampled piecewise linear.
pub fn bump_potential(support: f64, radius: f64, amp: f64, n_nodes: usize) -> PotentialGrid {
    PotentialGrid::from_fn(support, radius, n_nodes, move |x| {
        let t = x / radius;
        let w = 1.0 - t * t;
        if w <= 1e-12 {
            0.0
        } else {
            amp * (1.0 - 1.0 / w).exp()
        }
    })
    .expect("valid bump grid")
}

/// Smooth compactly supported potential with vanishing half-line integrals:
/// the second derivative of the standard bump. Both `int_0^inf q` and
/// `int_-inf^0 q` are exactly zero (the bump's derivative vanishes at 0 and
/// at the support edge), which keeps the large-frequency reflection
/// expansion free of the half-line-mean offset.
pub fn zero_mean_bump(support: f64, radius: f64, amp: f64, n_nodes: usize) -> PotentialGrid {
    PotentialGrid::from_fn(support, radius, n_nodes, move |x| {
        let t = x / radius;
        let w = 1.0 - t * t;
        if w <= 1e-6 {
            0.0
        } else {
            // d^2/dt^2 of e^{-1/w}, w = 1 - t^2
            amp * (1.0 - 1.0 / w).exp() * (4.0 * t * t / w.powi(4) - 2.0 / (w * w)
                - 8.0 * t * t / w.powi(3))
        }
    })
    .expect("valid zero-mean bump")
}

/// Symmetric linear frequency grid `+-[step, max]` with `n` points per side.
pub fn sym_grid(max: f64, n: usize) -> Vec<f64> {
    let mut g = Vec::with_capacity(2 * n);
    for k in 1..=n {
        let x = max * k as f64 / n as f64;
        g.push(-x);
        g.push(x);
    }
    g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    g
}

/// Symmetric log-spaced grid, dense near the origin.
pub fn log_sym_grid(min: f64, max: f64, ratio: f64) -> Vec<f64> {
    let mut g = Vec::new();
    let mut x = min;
    while x < max {
        g.push(-x);
        g.push(x);
        x *= ratio;
    }
    g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    g
}
