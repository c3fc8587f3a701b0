//! Forward scattering: Jost solutions under the transfer condition, the
//! coefficients A and B, the reflection coefficient, and the bound states.
//!
//! Conventions. On the right of the support the left Jost solution expands as
//! `f_minus(x) = a e^{-i xi x} + b e^{i xi x}`; the reported pair is
//! `A = a`, `B = -b`. The sign of B is fixed so that its large-`xi` behaviour
//! is `i xi m12 / 2 + (m22 - m11) / 2 + ...`, which is the convention all the
//! reconstruction formulas in [`crate::inverse`] assume. The free-potential
//! closed form is the convention oracle (see the test suite).

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::refine_bracket;
use crate::ode::{free_propagate, propagate, OdeOptions};
use crate::potential::PotentialGrid;
use crate::state::StateVector;
use crate::transfer::TransferMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// A Jost solution sampled at requested positions.
#[derive(Debug, Clone)]
pub struct JostSide {
    pub side: Side,
    pub xs: Vec<f64>,
    pub y: Vec<Complex64>,
    pub yp: Vec<Complex64>,
}

fn require_upper_half(zeta: Complex64) -> Result<()> {
    if zeta.im < 0.0 {
        return Err(Error::Domain(format!(
            "Jost solutions require Im zeta >= 0, got Im zeta = {}",
            zeta.im
        )));
    }
    Ok(())
}

/// Free right Jost values `(e^{i zeta x}, i zeta e^{i zeta x})`.
fn free_plus(zeta: Complex64, x: f64) -> (Complex64, Complex64) {
    let e = (Complex64::i() * zeta * x).exp();
    (e, Complex64::i() * zeta * e)
}

/// Free left Jost values `(e^{-i zeta x}, -i zeta e^{-i zeta x})`.
fn free_minus(zeta: Complex64, x: f64) -> (Complex64, Complex64) {
    let e = (-Complex64::i() * zeta * x).exp();
    (e, -Complex64::i() * zeta * e)
}

/// Moves a state downward to `target`, applying the inverse transfer at the
/// origin and switching to the exact free form below the support.
fn move_down(
    q: &PotentialGrid,
    m: &TransferMatrix,
    zeta: Complex64,
    mut cur: StateVector,
    target: f64,
    opts: &OdeOptions,
) -> Result<StateVector> {
    let s = q.support();
    while cur.x > target {
        let mut stop = target;
        if cur.x > 0.0 && stop < 0.0 {
            stop = 0.0;
        } else if cur.x > -s && stop < -s {
            stop = -s;
        }
        cur = if stop >= -s {
            propagate(q, zeta, cur.x, stop, &cur, opts)?
        } else {
            free_propagate(zeta, cur.x, stop, &cur)?
        };
        if stop == 0.0 && target < 0.0 {
            cur = m.apply_inverse(&cur)?;
        }
        if stop == target {
            break;
        }
    }
    Ok(cur)
}

/// Mirror of [`move_down`] for the left Jost solution.
fn move_up(
    q: &PotentialGrid,
    m: &TransferMatrix,
    zeta: Complex64,
    mut cur: StateVector,
    target: f64,
    opts: &OdeOptions,
) -> Result<StateVector> {
    let s = q.support();
    while cur.x < target {
        let mut stop = target;
        if cur.x < 0.0 && stop > 0.0 {
            stop = 0.0;
        } else if cur.x < s && stop > s {
            stop = s;
        }
        cur = if stop <= s {
            propagate(q, zeta, cur.x, stop, &cur, opts)?
        } else {
            free_propagate(zeta, cur.x, stop, &cur)?
        };
        if stop == 0.0 && target > 0.0 {
            cur = m.apply(&cur)?;
        }
        if stop == target {
            break;
        }
    }
    Ok(cur)
}

/// Right Jost solution: exactly `e^{i zeta x}` for `x >= S`, integrated inward
/// below, with the inverse transfer applied at the origin. At `x = 0` the
/// returned values are the `0+` limits.
pub fn jost_plus(
    q: &PotentialGrid,
    m: &TransferMatrix,
    zeta: Complex64,
    xs: &[f64],
    opts: &OdeOptions,
) -> Result<JostSide> {
    require_upper_half(zeta)?;
    let s = q.support();
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[b].partial_cmp(&xs[a]).unwrap());
    let mut y = vec![Complex64::default(); xs.len()];
    let mut yp = vec![Complex64::default(); xs.len()];
    let (y0, yp0) = free_plus(zeta, s);
    let mut cur = StateVector::new(y0, yp0, s, zeta);
    for idx in order {
        let x = xs[idx];
        if x >= s {
            let (v, vp) = free_plus(zeta, x);
            y[idx] = v;
            yp[idx] = vp;
        } else {
            cur = move_down(q, m, zeta, cur, x, opts)?;
            y[idx] = cur.y;
            yp[idx] = cur.yp;
        }
    }
    Ok(JostSide { side: Side::Plus, xs: xs.to_vec(), y, yp })
}

/// Left Jost solution: exactly `e^{-i zeta x}` for `x <= -S`, integrated
/// outward with the transfer applied at the origin. At `x = 0` the returned
/// values are the `0-` limits.
pub fn jost_minus(
    q: &PotentialGrid,
    m: &TransferMatrix,
    zeta: Complex64,
    xs: &[f64],
    opts: &OdeOptions,
) -> Result<JostSide> {
    require_upper_half(zeta)?;
    let s = q.support();
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
    let mut y = vec![Complex64::default(); xs.len()];
    let mut yp = vec![Complex64::default(); xs.len()];
    let (y0, yp0) = free_minus(zeta, -s);
    let mut cur = StateVector::new(y0, yp0, -s, zeta);
    for idx in order {
        let x = xs[idx];
        if x <= -s {
            let (v, vp) = free_minus(zeta, x);
            y[idx] = v;
            yp[idx] = vp;
        } else {
            cur = move_up(q, m, zeta, cur, x, opts)?;
            y[idx] = cur.y;
            yp[idx] = cur.yp;
        }
    }
    Ok(JostSide { side: Side::Minus, xs: xs.to_vec(), y, yp })
}

/// The left Jost solution carried to the right support edge `x = S`.
fn minus_state_at_edge(
    q: &PotentialGrid,
    m: &TransferMatrix,
    zeta: Complex64,
    opts: &OdeOptions,
) -> Result<StateVector> {
    let s = q.support();
    let (y0, yp0) = free_minus(zeta, -s);
    let cur = StateVector::new(y0, yp0, -s, zeta);
    move_up(q, m, zeta, cur, s, opts)
}

/// Matches the left Jost solution at `x = S` against `{e^{-i zeta x},
/// e^{i zeta x}}` and returns the expansion pair `(a, b)`:
/// `f_minus(x >= S) = a e^{-i zeta x} + b e^{i zeta x}`.
fn match_at_edge(u: Complex64, v: Complex64, zeta: Complex64, s: f64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let a = (i * zeta * s).exp() * (u - v / (i * zeta)) * 0.5;
    let b = (-i * zeta * s).exp() * (u + v / (i * zeta)) * 0.5;
    (a, b)
}

/// Scattering coefficients at real nonzero `xi`, in the reported convention
/// (`|A|^2 - |B|^2 = 1`).
pub fn scattering_ab(
    q: &PotentialGrid,
    m: &TransferMatrix,
    xi: f64,
    opts: &OdeOptions,
) -> Result<(Complex64, Complex64)> {
    if xi == 0.0 || !xi.is_finite() {
        return Err(Error::Domain("scattering coefficients require real nonzero xi".into()));
    }
    let zeta = Complex64::new(xi, 0.0);
    let st = minus_state_at_edge(q, m, zeta, opts)?;
    let (a, b) = match_at_edge(st.y, st.yp, zeta, q.support());
    Ok((a, -b))
}

/// Analytic continuation of A into the closed upper half-plane, through the
/// same matching expression. Extracts the coefficient of the growing basis
/// solution, so it stays stable for `Im zeta > 0`.
pub fn coefficient_a(
    q: &PotentialGrid,
    m: &TransferMatrix,
    zeta: Complex64,
    opts: &OdeOptions,
) -> Result<Complex64> {
    require_upper_half(zeta)?;
    if zeta.norm() == 0.0 {
        return Err(Error::Domain("A has a singularity at zeta = 0".into()));
    }
    let st = minus_state_at_edge(q, m, zeta, opts)?;
    let (a, _) = match_at_edge(st.y, st.yp, zeta, q.support());
    Ok(a)
}

/// Reflection coefficient `R = B / A` over a frequency grid; evaluations are
/// independent and run in parallel.
pub fn reflection_grid(
    q: &PotentialGrid,
    m: &TransferMatrix,
    xi_grid: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<Complex64>> {
    xi_grid
        .par_iter()
        .map(|&xi| {
            let (a, b) = scattering_ab(q, m, xi, opts)?;
            if a.norm() < 1e-12 {
                return Err(Error::Degenerate(format!(
                    "|A({xi})| = {:.3e} is numerically degenerate",
                    a.norm()
                )));
            }
            let r = b / a;
            if !(r.norm() < 1.0) {
                return Err(Error::Degenerate(format!(
                    "|R({xi})| = {} >= 1 violates unitarity",
                    r.norm()
                )));
            }
            Ok(r)
        })
        .collect()
}

/// Bound-state search output. Warnings flag clustered roots that the scan
/// resolution may not separate reliably.
#[derive(Debug, Clone)]
pub struct BoundStateScan {
    pub etas: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Real-valued function whose zeros on `eta > 0` are the bound states:
/// `2 eta A(i eta)`, i.e. the Wronskian of the two Jost solutions.
pub fn bound_state_function(
    q: &PotentialGrid,
    m: &TransferMatrix,
    eta: f64,
    opts: &OdeOptions,
) -> Result<f64> {
    let a = coefficient_a(q, m, Complex64::new(0.0, eta), opts)?;
    Ok(2.0 * eta * a.re)
}

/// Finds all bound states `-eta^2` with `eta` in `(0, eta_max]` by sign scan
/// plus Illinois-style bracket refinement.
pub fn bound_states(
    q: &PotentialGrid,
    m: &TransferMatrix,
    eta_max: f64,
    opts: &OdeOptions,
) -> Result<BoundStateScan> {
    if !(eta_max > 0.0) {
        return Err(Error::Domain("eta_max must be positive".into()));
    }
    let n_scan = 1000usize;
    let step = eta_max / n_scan as f64;
    let mut grid: Vec<f64> = Vec::with_capacity(n_scan + 1);
    grid.push(step * 1e-2);
    for j in 1..=n_scan {
        grid.push(step * j as f64);
    }
    let vals: Vec<f64> = grid
        .par_iter()
        .map(|&eta| bound_state_function(q, m, eta, opts))
        .collect::<Result<_>>()?;

    let mut etas = Vec::new();
    let mut warnings = Vec::new();
    let scale = vals.iter().fold(0.0f64, |mx, v| mx.max(v.abs())).max(1e-300);
    let f = |eta: f64| bound_state_function(q, m, eta, opts);
    for k in 0..grid.len() {
        if vals[k].abs() < 1e-14 * scale {
            // root sitting on a scan point: refine in the surrounding cell
            let lo = if k == 0 { grid[0] * 0.5 } else { grid[k - 1] };
            let hi = if k + 1 < grid.len() { grid[k + 1] } else { grid[k] };
            let eta = match (f(lo), f(hi)) {
                (Ok(fl), Ok(fh)) if fl * fh < 0.0 => refine_bracket(&f, lo, hi, fl, fh)?,
                _ => grid[k],
            };
            push_root(&mut etas, &mut warnings, eta, step);
            continue;
        }
        if k + 1 < grid.len() && vals[k] * vals[k + 1] < 0.0 {
            let eta = refine_bracket(&f, grid[k], grid[k + 1], vals[k], vals[k + 1])?;
            push_root(&mut etas, &mut warnings, eta, step);
        }
    }
    etas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    etas.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    Ok(BoundStateScan { etas, warnings })
}

fn push_root(etas: &mut Vec<f64>, warnings: &mut Vec<String>, eta: f64, step: f64) {
    if let Some(&last) = etas.last() {
        if (eta - last).abs() < 2.0 * step {
            warnings.push(format!(
                "roots at eta = {last:.6e} and eta = {eta:.6e} are closer than twice the scan step"
            ));
        }
    }
    etas.push(eta);
}

/// Large-frequency closed forms for A and B including the potential integral
/// term, used as a residual reference.
pub fn ab_asymptotic(
    q: &PotentialGrid,
    m: &TransferMatrix,
    zeta: Complex64,
) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let half_trace = 0.5 * m.trace();
    let half_skew = 0.5 * (m.m22() - m.m11());
    let total = q.integral();
    let i_a = 0.5 * total
        + 0.5
            * (q.oscillatory_integral(2.0 * zeta, 0.0, f64::INFINITY)
                + q.oscillatory_integral(-2.0 * zeta, f64::NEG_INFINITY, 0.0));
    let i_b = 0.5 * total + 0.5 * q.oscillatory_integral(-2.0 * zeta, f64::NEG_INFINITY, f64::INFINITY);
    let a = -i * zeta * m.m12() * 0.5 + half_trace + 0.5 * m.m12() * i_a;
    let b = i * zeta * m.m12() * 0.5 + half_skew - 0.5 * m.m12() * i_b;
    (a, b)
}

/// Residuals of the computed coefficients against their large-frequency
/// forms; these must decay like `1/(1+|xi|)`.
#[derive(Debug, Clone)]
pub struct AbResidualTrace {
    pub xi: Vec<f64>,
    pub a_residual: Vec<f64>,
    pub b_residual: Vec<f64>,
}

pub fn asymptotic_ab_check(
    q: &PotentialGrid,
    m: &TransferMatrix,
    xi_grid: &[f64],
    opts: &OdeOptions,
) -> Result<AbResidualTrace> {
    let reach = xi_grid.iter().fold(0.0f64, |mx, x| mx.max(x.abs()));
    if reach < 50.0 {
        return Err(Error::Contract(format!(
            "asymptotic check needs the grid to reach |xi| >= 50, got {reach}"
        )));
    }
    let pairs: Vec<(f64, f64)> = xi_grid
        .par_iter()
        .map(|&xi| {
            let (a, b) = scattering_ab(q, m, xi, opts)?;
            let (af, bf) = ab_asymptotic(q, m, Complex64::new(xi, 0.0));
            Ok(((a - af).norm(), (b - bf).norm()))
        })
        .collect::<Result<_>>()?;
    Ok(AbResidualTrace {
        xi: xi_grid.to_vec(),
        a_residual: pairs.iter().map(|p| p.0).collect(),
        b_residual: pairs.iter().map(|p| p.1).collect(),
    })
}

/// Full forward run: reflection over the grid plus the bound states.
pub fn forward_scattering(
    q: &PotentialGrid,
    m: &TransferMatrix,
    xi_grid: &[f64],
    eta_max: f64,
    opts: &OdeOptions,
) -> Result<crate::scattering::ScatteringData> {
    let r = reflection_grid(q, m, xi_grid, opts)?;
    let scan = bound_states(q, m, eta_max, opts)?;
    crate::scattering::ScatteringData::new(xi_grid.to_vec(), r, scan.etas)
}
