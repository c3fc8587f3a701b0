//! Titchmarsh-Weyl machinery for compactly supported potentials on `[-S, S]`
//! with the transfer condition at the origin: the H-normalized fundamental
//! pair `(w1, w2)`, its reconstruction at `x = S` from scattering data, the
//! m-function `-w1(S)/w2(S)`, the characteristic function
//! `Delta(lambda) = w2(S, lambda)` with its (double-Dirichlet) eigenvalues,
//! and constructive potential recovery by regularized least squares.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::{levenberg_marquardt, refine_bracket, LmOptions};
use crate::inverse::{dispersion_a_boundary, mrec_from_matrix};
use crate::ode::{free_propagate, propagate, propagate_cells, OdeOptions};
use crate::potential::PotentialGrid;
use crate::scattering::{ComplexFunctionTrace, ScatteringData};
use crate::state::StateVector;
use crate::transfer::TransferMatrix;

/// Values of the fundamental pair at one point. The pair is normalized by
/// `w1(-S) = -1, w1'(-S) = 0, w2(-S) = 0, w2'(-S) = 1`, so its Wronskian
/// `w1 w2' - w2 w1'` equals -1 everywhere.
#[derive(Debug, Clone, Copy)]
pub struct FundamentalPair {
    pub lambda: Complex64,
    pub x: f64,
    pub w1: Complex64,
    pub w1p: Complex64,
    pub w2: Complex64,
    pub w2p: Complex64,
}

impl FundamentalPair {
    pub fn wronskian(&self) -> Complex64 {
        self.w1 * self.w2p - self.w2 * self.w1p
    }
}

/// Sampled m-function values.
#[derive(Debug, Clone)]
pub struct MFunctionTrace {
    pub lambdas: Vec<Complex64>,
    pub m_values: Vec<Complex64>,
    pub support: f64,
}

/// One solution column sampled along requested positions.
#[derive(Debug, Clone)]
pub struct SolutionTrace {
    pub xs: Vec<f64>,
    pub y: Vec<Complex64>,
    pub yp: Vec<Complex64>,
}

#[derive(Clone, Copy)]
enum Path<'a> {
    Adaptive(&'a OdeOptions),
    /// Exact per-cell products; requires a piecewise-constant potential.
    ExactCells,
}

fn step(
    q: &PotentialGrid,
    zeta: Complex64,
    from: f64,
    to: f64,
    st: &StateVector,
    path: Path,
) -> Result<StateVector> {
    let _ = from;
    match path {
        Path::Adaptive(opts) => propagate(q, zeta, st.x, to, st, opts),
        Path::ExactCells => propagate_cells(q, zeta, st.x, to, st),
    }
}

/// Walks a state from `-S` upward through the transfer condition, recording
/// values at the requested positions.
fn sweep_up(
    q: &PotentialGrid,
    m: &TransferMatrix,
    zeta: Complex64,
    init: (Complex64, Complex64),
    xs: &[f64],
    path: Path,
) -> Result<SolutionTrace> {
    let s = q.support();
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
    let mut y = vec![Complex64::default(); xs.len()];
    let mut yp = vec![Complex64::default(); xs.len()];
    let mut cur = StateVector::new(init.0, init.1, -s, zeta);
    for idx in order {
        let x = xs[idx];
        if x < -s {
            let out = free_propagate(zeta, -s, x, &StateVector::new(init.0, init.1, -s, zeta))?;
            y[idx] = out.y;
            yp[idx] = out.yp;
            continue;
        }
        while cur.x < x {
            let mut stop = x;
            if cur.x < 0.0 && stop > 0.0 {
                stop = 0.0;
            } else if cur.x < s && stop > s {
                stop = s;
            }
            cur = if stop <= s {
                step(q, zeta, cur.x, stop, &cur, path)?
            } else {
                free_propagate(zeta, cur.x, stop, &cur)?
            };
            if stop == 0.0 && x > 0.0 {
                cur = m.apply(&cur)?;
            }
            if stop == x {
                break;
            }
        }
        y[idx] = cur.y;
        yp[idx] = cur.yp;
    }
    Ok(SolutionTrace { xs: xs.to_vec(), y, yp })
}

fn fundamental_pair_with(
    q: &PotentialGrid,
    m: &TransferMatrix,
    lambda: Complex64,
    xs: &[f64],
    path: Path,
) -> Result<Vec<FundamentalPair>> {
    let zeta = lambda.sqrt();
    let one = Complex64::new(1.0, 0.0);
    let w1 = sweep_up(q, m, zeta, (-one, Complex64::default()), xs, path)?;
    let w2 = sweep_up(q, m, zeta, (Complex64::default(), one), xs, path)?;
    let drift_budget = match path {
        Path::Adaptive(opts) => 1e3 * opts.abs_tol.max(opts.rel_tol).max(1e-12),
        Path::ExactCells => 1e-10,
    };
    let mut out = Vec::with_capacity(xs.len());
    for k in 0..xs.len() {
        let pair = FundamentalPair {
            lambda,
            x: xs[k],
            w1: w1.y[k],
            w1p: w1.yp[k],
            w2: w2.y[k],
            w2p: w2.yp[k],
        };
        // determinant of the H-normalized pair is -1; the check is relative
        // because the entries grow exponentially in |Im sqrt(lambda)|
        let scale = 1.0 + (pair.w1 * pair.w2p).norm() + (pair.w2 * pair.w1p).norm();
        if (pair.wronskian() + 1.0).norm() > drift_budget * scale {
            return Err(Error::Integration(format!(
                "fundamental-pair Wronskian drifted to {} at x = {}, lambda = {}",
                pair.wronskian(),
                xs[k],
                lambda
            )));
        }
        out.push(pair);
    }
    Ok(out)
}

/// Fundamental pair by direct integration from `-S` (transfer applied at 0).
pub fn fundamental_pair_direct(
    q: &PotentialGrid,
    m: &TransferMatrix,
    lambda: Complex64,
    xs: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<FundamentalPair>> {
    fundamental_pair_with(q, m, lambda, xs, Path::Adaptive(opts))
}

/// Second fundamental solution only (`w2(-S) = 0, w2'(-S) = 1`).
pub fn w2_solution(
    q: &PotentialGrid,
    m: &TransferMatrix,
    lambda: Complex64,
    xs: &[f64],
    opts: &OdeOptions,
) -> Result<SolutionTrace> {
    let zeta = lambda.sqrt();
    sweep_up(q, m, zeta, (Complex64::default(), Complex64::new(1.0, 0.0)), xs, Path::Adaptive(opts))
}

/// `Delta(lambda) = w2(S, lambda)`, the characteristic function whose real
/// zeros are the eigenvalues of the double-Dirichlet transfer problem.
pub fn delta_at(
    q: &PotentialGrid,
    m: &TransferMatrix,
    lambda: Complex64,
    opts: &OdeOptions,
) -> Result<Complex64> {
    Ok(w2_solution(q, m, lambda, &[q.support()], opts)?.y[0])
}

/// Delta sampled over a grid of spectral points (parallel).
pub fn delta_trace(
    q: &PotentialGrid,
    m: &TransferMatrix,
    lambdas: &[Complex64],
    opts: &OdeOptions,
) -> Result<ComplexFunctionTrace> {
    let values: Vec<Complex64> =
        lambdas.par_iter().map(|&l| delta_at(q, m, l, opts)).collect::<Result<_>>()?;
    ComplexFunctionTrace::new(lambdas.to_vec(), values, "Delta")
}

/// Real eigenvalues in the window by sign scan plus bracket refinement of
/// `Delta` along the real axis.
pub fn dirichlet_eigenvalues(
    q: &PotentialGrid,
    m: &TransferMatrix,
    window: (f64, f64),
    n_scan: usize,
    opts: &OdeOptions,
) -> Result<Vec<f64>> {
    let (lo, hi) = window;
    if !(hi > lo) || n_scan < 2 {
        return Err(Error::Contract("eigenvalue window must be nonempty".into()));
    }
    let grid: Vec<f64> = (0..=n_scan).map(|k| lo + (hi - lo) * k as f64 / n_scan as f64).collect();
    let vals: Vec<f64> = grid
        .par_iter()
        .map(|&l| Ok(delta_at(q, m, Complex64::new(l, 0.0), opts)?.re))
        .collect::<Result<_>>()?;
    let f = |l: f64| Ok(delta_at(q, m, Complex64::new(l, 0.0), opts)?.re);
    let mut out = Vec::new();
    for k in 0..n_scan {
        if vals[k] == 0.0 {
            out.push(grid[k]);
        } else if vals[k] * vals[k + 1] < 0.0 {
            out.push(refine_bracket(&f, grid[k], grid[k + 1], vals[k], vals[k + 1])?);
        }
    }
    Ok(out)
}

/// Number of zeros of `Delta` inside a rectangle of the complex
/// lambda-plane, by the winding of the argument along the boundary. Used to
/// confirm that no eigenvalues sit off the real axis.
pub fn count_delta_zeros_in_rect(
    q: &PotentialGrid,
    m: &TransferMatrix,
    re_range: (f64, f64),
    im_range: (f64, f64),
    n_per_side: usize,
    opts: &OdeOptions,
) -> Result<usize> {
    let (x0, x1) = re_range;
    let (y0, y1) = im_range;
    let mut boundary = Vec::with_capacity(4 * n_per_side);
    for k in 0..n_per_side {
        let t = k as f64 / n_per_side as f64;
        boundary.push(Complex64::new(x0 + (x1 - x0) * t, y0));
    }
    for k in 0..n_per_side {
        let t = k as f64 / n_per_side as f64;
        boundary.push(Complex64::new(x1, y0 + (y1 - y0) * t));
    }
    for k in 0..n_per_side {
        let t = k as f64 / n_per_side as f64;
        boundary.push(Complex64::new(x1 - (x1 - x0) * t, y1));
    }
    for k in 0..n_per_side {
        let t = k as f64 / n_per_side as f64;
        boundary.push(Complex64::new(x0, y1 - (y1 - y0) * t));
    }
    let vals: Vec<Complex64> =
        boundary.par_iter().map(|&l| delta_at(q, m, l, opts)).collect::<Result<_>>()?;
    let mut winding = 0.0f64;
    for k in 0..vals.len() {
        let a = vals[k];
        let b = vals[(k + 1) % vals.len()];
        if a.norm() == 0.0 || b.norm() == 0.0 {
            return Err(Error::Degenerate("Delta zero on the counting contour".into()));
        }
        winding += (b / a).arg();
    }
    Ok((winding / (2.0 * std::f64::consts::PI)).round() as usize)
}

/// Solution with terminal data `v(S) = 0, v'(S) = 1`, integrated backward
/// through the inverse transfer at the origin. Satisfies
/// `-v(-S, lambda) = Delta(lambda)`.
pub fn v_solution(
    q: &PotentialGrid,
    m: &TransferMatrix,
    lambda: Complex64,
    xs: &[f64],
    opts: &OdeOptions,
) -> Result<SolutionTrace> {
    let zeta = lambda.sqrt();
    let s = q.support();
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[b].partial_cmp(&xs[a]).unwrap());
    let mut y = vec![Complex64::default(); xs.len()];
    let mut yp = vec![Complex64::default(); xs.len()];
    let init = StateVector::new(Complex64::default(), Complex64::new(1.0, 0.0), s, zeta);
    let mut cur = init;
    for idx in order {
        let x = xs[idx];
        if x > s {
            let out = free_propagate(zeta, s, x, &init)?;
            y[idx] = out.y;
            yp[idx] = out.yp;
            continue;
        }
        while cur.x > x {
            let mut stop = x;
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
            if stop == 0.0 && x < 0.0 {
                cur = m.apply_inverse(&cur)?;
            }
            if stop == x {
                break;
            }
        }
        y[idx] = cur.y;
        yp[idx] = cur.yp;
    }
    Ok(SolutionTrace { xs: xs.to_vec(), y, yp })
}

/// Rebuilds the fundamental pair at `x = S` from the scattering coefficients
/// at real `xi` (reported sign convention, as produced by the forward and
/// inverse modules). The expansion coefficient of `e^{i xi x}` in the left
/// Jost solution is `-B`, hence the sign flip applied here.
pub fn reconstruct_w_at_s(a: Complex64, b: Complex64, s: f64, xi: f64) -> Result<FundamentalPair> {
    if xi == 0.0 || !xi.is_finite() {
        return Err(Error::Domain("W reconstruction requires real nonzero xi".into()));
    }
    let i = Complex64::i();
    let b_plus = -b;
    let e_m = (-i * xi * s).exp();
    let e_p = (i * xi * s).exp();
    let two_i_xi = 2.0 * i * xi;
    // initial coefficients of (w1, w2) in the {e^{-i xi x}, e^{i xi x}} basis
    let a1 = -e_m / 2.0;
    let b1 = -e_p / 2.0;
    let a2 = -e_m / two_i_xi;
    let b2 = e_p / two_i_xi;
    // coefficients on the right of the support
    let hat = |aj: Complex64, bj: Complex64| -> (Complex64, Complex64) {
        (a * aj + b_plus.conj() * bj, b_plus * aj + a.conj() * bj)
    };
    let (a1h, b1h) = hat(a1, b1);
    let (a2h, b2h) = hat(a2, b2);
    let eval = |ah: Complex64, bh: Complex64| -> (Complex64, Complex64) {
        (ah * e_m + bh * e_p, -i * xi * ah * e_m + i * xi * bh * e_p)
    };
    let (w1, w1p) = eval(a1h, b1h);
    let (w2, w2p) = eval(a2h, b2h);
    Ok(FundamentalPair { lambda: Complex64::new(xi * xi, 0.0), x: s, w1, w1p, w2, w2p })
}

/// Titchmarsh-Weyl m-function from the pair at the right endpoint:
/// `m = -w1(S)/w2(S)`.
pub fn m_function(pair: &FundamentalPair) -> Result<Complex64> {
    if pair.w2.norm() < 1e-12 {
        return Err(Error::MFunctionPole { nearest_zero: pair.lambda.re, w2_abs: pair.w2.norm() });
    }
    Ok(-pair.w1 / pair.w2)
}

/// Controls for the potential-recovery fit.
#[derive(Debug, Clone)]
pub struct RecoverOptions {
    /// Second-difference regularization weight; must be positive.
    pub reg: f64,
    /// Number of frequency samples drawn from the data grid.
    pub n_samples: usize,
    /// Frequency band to fit on; defaults scale with the support.
    pub xi_min: Option<f64>,
    pub xi_max: Option<f64>,
    pub max_iterations: usize,
    pub ode: OdeOptions,
    /// Starting cell values; zeros when absent.
    pub initial: Option<Vec<f64>>,
}

impl Default for RecoverOptions {
    fn default() -> Self {
        RecoverOptions {
            reg: 1e-4,
            n_samples: 48,
            xi_min: None,
            xi_max: None,
            max_iterations: 80,
            ode: OdeOptions::default(),
            initial: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecoverReport {
    pub grid: PotentialGrid,
    /// `(iteration, objective, gradient norm)` per accepted step.
    pub misfit_history: Vec<(usize, f64, f64)>,
    pub converged: bool,
    pub stagnated: bool,
    /// Frequencies kept after pole avoidance.
    pub kept_xi: Vec<f64>,
    pub m_data: MFunctionTrace,
}

/// Model m-function for a piecewise-constant candidate, through the exact
/// cell propagation (fast path inside the fitting loop).
fn m_model(cells: &[f64], m: &TransferMatrix, s: f64, lambda: Complex64) -> Result<Complex64> {
    let q = PotentialGrid::from_cells(s, cells)?;
    let pair = fundamental_pair_with(&q, m, lambda, &[s], Path::ExactCells)?;
    m_function(&pair[0])
}

fn fit_stage(
    m_data: &MFunctionTrace,
    m: &TransferMatrix,
    n_cells: usize,
    reg: f64,
    x0: &[f64],
    max_iterations: usize,
) -> Result<crate::fit::LmResult> {
    let s = m_data.support;
    let lambdas = &m_data.lambdas;
    let targets = &m_data.m_values;
    let sqrt_reg = reg.sqrt();
    let residuals = |cells: &[f64]| -> Result<Vec<f64>> {
        let mut r = Vec::with_capacity(2 * lambdas.len() + n_cells);
        for (l, t) in lambdas.iter().zip(targets) {
            let mv = m_model(cells, m, s, *l)?;
            r.push(mv.re - t.re);
            r.push(mv.im - t.im);
        }
        for k in 1..n_cells.saturating_sub(1) {
            r.push(sqrt_reg * (cells[k - 1] - 2.0 * cells[k] + cells[k + 1]));
        }
        Ok(r)
    };
    levenberg_marquardt(
        residuals,
        x0,
        &LmOptions { max_iterations, ..Default::default() },
    )
}

/// Core fitting loop: least squares on the m-function misfit over the given
/// spectral samples with a second-difference penalty. Starts from
/// `opts.initial`, or from zero cells when absent.
pub fn recover_from_m_trace(
    m_data: &MFunctionTrace,
    m: &TransferMatrix,
    n_cells: usize,
    opts: &RecoverOptions,
) -> Result<RecoverReport> {
    if !(opts.reg > 0.0) {
        return Err(Error::Domain(format!(
            "regularization weight must be positive, got {}",
            opts.reg
        )));
    }
    if n_cells == 0 {
        return Err(Error::Contract("need at least one cell".into()));
    }
    let s = m_data.support;
    let x0 = match &opts.initial {
        Some(v) => {
            if v.len() != n_cells {
                return Err(Error::Contract("initial guess length must equal n_cells".into()));
            }
            v.clone()
        }
        None => vec![0.0; n_cells],
    };
    let lm = fit_stage(m_data, m, n_cells, opts.reg, &x0, opts.max_iterations)?;
    let grid = PotentialGrid::from_cells(s, &lm.x)?;
    Ok(RecoverReport {
        grid,
        misfit_history: lm.history,
        converged: lm.converged,
        stagnated: lm.stagnated,
        kept_xi: m_data.lambdas.iter().map(|l| l.re.max(0.0).sqrt()).collect(),
        m_data: m_data.clone(),
    })
}

/// Full data-driven recovery: m-function samples are built from the
/// scattering data through the dispersion reconstruction of A (or from the
/// supplied A/B traces aligned with the data grid), then the potential is
/// fitted on them. Samples too close to a pole of m are dropped.
pub fn recover_potential(
    sd: &ScatteringData,
    m: &TransferMatrix,
    s: f64,
    n_cells: usize,
    opts: &RecoverOptions,
    ab: Option<(&[Complex64], &[Complex64])>,
) -> Result<RecoverReport> {
    if !(opts.reg > 0.0) {
        return Err(Error::Domain(format!(
            "regularization weight must be positive, got {}",
            opts.reg
        )));
    }
    // frequency band: resolve cell-scale oscillations but stay on the grid
    // and above the boundary-extrapolation floor
    let xi_lo = opts.xi_min.unwrap_or((0.25 / s).max(crate::inverse::BOUNDARY_XI_FLOOR));
    let xi_hi_default = (0.6 * std::f64::consts::PI * n_cells as f64 / (2.0 * s)).max(4.0 / s);
    let xi_hi = opts.xi_max.unwrap_or(xi_hi_default).min(sd.max_abs_xi());
    let mut candidates: Vec<usize> = (0..sd.len())
        .filter(|&k| {
            let x = sd.xi()[k];
            x > xi_lo && x < xi_hi
        })
        .collect();
    candidates.sort_by(|&a, &b| sd.xi()[a].partial_cmp(&sd.xi()[b]).unwrap());
    if candidates.len() < 4 {
        return Err(Error::Contract(format!(
            "too few data frequencies in the fitting band [{xi_lo}, {xi_hi}]"
        )));
    }
    let stride = (candidates.len() / opts.n_samples).max(1);
    let chosen: Vec<usize> = candidates.iter().copied().step_by(stride).collect();

    let mrec = mrec_from_matrix(m);
    let pairs: Vec<(f64, FundamentalPair)> = chosen
        .par_iter()
        .map(|&k| {
            let xi = sd.xi()[k];
            let (a, b) = match ab {
                Some((a_vals, b_vals)) => (a_vals[k], b_vals[k]),
                None => {
                    let a = dispersion_a_boundary(sd, &mrec, xi)?;
                    (a, sd.reflection()[k] * a)
                }
            };
            Ok((xi, reconstruct_w_at_s(a, b, s, xi)?))
        })
        .collect::<Result<_>>()?;

    // pole avoidance: keep samples with |w2| above a fraction of the median
    let mut mags: Vec<f64> = pairs.iter().map(|(_, p)| p.w2.norm()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let floor = 0.15 * mags[mags.len() / 2];
    let mut lambdas = Vec::new();
    let mut values = Vec::new();
    let mut kept_xi = Vec::new();
    for (xi, pair) in &pairs {
        if pair.w2.norm() >= floor {
            if let Ok(mv) = m_function(pair) {
                lambdas.push(pair.lambda);
                values.push(mv);
                kept_xi.push(*xi);
            }
        }
    }
    if lambdas.len() < n_cells + 2 {
        return Err(Error::Degenerate(format!(
            "only {} usable m-samples for {} cells; widen the fitting band",
            lambdas.len(),
            n_cells
        )));
    }
    // stage one: fit the reconstructed pair entries themselves. They are
    // entire in the spectral parameter (no poles), so the misfit landscape
    // admits a cold start; the m-misfit stage then polishes from there.
    let initial = match &opts.initial {
        Some(v) => v.clone(),
        None => {
            let fit = fit_w_entries(&pairs, m, s, n_cells, opts)?;
            fit.x
        }
    };
    let m_data = MFunctionTrace { lambdas, m_values: values, support: s };
    let staged = RecoverOptions { initial: Some(initial), ..opts.clone() };
    let mut report = recover_from_m_trace(&m_data, m, n_cells, &staged)?;
    report.kept_xi = kept_xi;
    Ok(report)
}

/// Cold-start initializer: least squares on the four reconstructed
/// fundamental-pair entries at `x = S` (derivative rows scaled down by the
/// frequency so all rows carry comparable weight).
fn fit_w_entries(
    pairs: &[(f64, FundamentalPair)],
    m: &TransferMatrix,
    s: f64,
    n_cells: usize,
    opts: &RecoverOptions,
) -> Result<crate::fit::LmResult> {
    let sqrt_reg = opts.reg.sqrt();
    let residuals = |cells: &[f64]| -> Result<Vec<f64>> {
        let q = PotentialGrid::from_cells(s, cells)?;
        let mut out = Vec::with_capacity(8 * pairs.len() + n_cells);
        for (xi, data) in pairs {
            let lambda = Complex64::new(xi * xi, 0.0);
            let model = &fundamental_pair_with(&q, m, lambda, &[s], Path::ExactCells)?[0];
            let sc = 1.0 / (1.0 + xi.abs());
            for (a, b, w) in [
                (model.w1, data.w1, 1.0),
                (model.w2, data.w2, 1.0),
                (model.w1p, data.w1p, sc),
                (model.w2p, data.w2p, sc),
            ] {
                out.push((a.re - b.re) * w);
                out.push((a.im - b.im) * w);
            }
        }
        for k in 1..n_cells.saturating_sub(1) {
            out.push(sqrt_reg * (cells[k - 1] - 2.0 * cells[k] + cells[k + 1]));
        }
        Ok(out)
    };
    levenberg_marquardt(
        residuals,
        &vec![0.0; n_cells],
        &LmOptions { max_iterations: opts.max_iterations, ..Default::default() },
    )
}

/// Relative L2 distance between two cell vectors.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Cell-averaged resampling of a potential onto `n` uniform cells, for
/// comparing a recovered grid against a reference of different resolution.
pub fn resample_to_cells(q: &PotentialGrid, s: f64, n: usize) -> Vec<f64> {
    let sub = 32;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let a = -s + 2.0 * s * k as f64 / n as f64;
        let b = -s + 2.0 * s * (k + 1) as f64 / n as f64;
        let mut acc = 0.0;
        for j in 0..sub {
            let x = a + (b - a) * (j as f64 + 0.5) / sub as f64;
            acc += q.value_at(x);
        }
        out.push(acc / sub as f64);
    }
    out
}
