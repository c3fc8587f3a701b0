//! Small dense least-squares helpers and a Levenberg-Marquardt loop. All the
//! systems solved here are tiny (at most a few dozen unknowns), so a
//! partial-pivot Gaussian elimination is plenty.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Solves `a x = b` in place for a small dense system.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for (row, r) in a.iter().enumerate() {
        if r.len() != n {
            return Err(Error::Contract(format!("row {row} has wrong length")));
        }
    }
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        if a[piv][col].abs() < 1e-300 {
            return Err(Error::Degenerate("singular linear system".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    let v = a[col][k];
                    a[row][k] -= f * v;
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col][k] * x[k];
        }
        x[col] = s / a[col][col];
    }
    Ok(x)
}

/// Solves a small dense complex system in place.
pub fn solve_dense_complex(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if a[row][col].norm() > a[piv][col].norm() {
                piv = row;
            }
        }
        if a[piv][col].norm() < 1e-300 {
            return Err(Error::Degenerate("singular complex linear system".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f.norm() != 0.0 {
                for k in col..n {
                    let v = a[col][k];
                    a[row][k] -= f * v;
                }
                let bv = b[col];
                b[row] -= f * bv;
            }
        }
    }
    let mut x = vec![Complex64::default(); n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col][k] * x[k];
        }
        x[col] = s / a[col][col];
    }
    Ok(x)
}

/// Fits `y ~ sum_{k=0}^{degree} c_k xi^{-k}` by least squares (normal
/// equations with column scaling) and returns `(c_0, rms residual)`; the
/// constant term is the extrapolated large-`xi` limit.
pub fn lsq_inverse_powers(xi: &[f64], y: &[Complex64], degree: usize) -> Result<(Complex64, f64)> {
    let n = xi.len();
    let p = degree + 1;
    if n < p + 1 {
        return Err(Error::Contract(format!(
            "need more than {p} samples for a degree-{degree} tail fit"
        )));
    }
    // columns xi^{-k}, scaled to unit max for conditioning
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(p);
    let mut scales = Vec::with_capacity(p);
    for k in 0..p {
        let raw: Vec<f64> = xi.iter().map(|&x| x.powi(-(k as i32))).collect();
        let scale = raw.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        scales.push(scale);
        cols.push(raw.iter().map(|&v| Complex64::new(v / scale, 0.0)).collect());
    }
    let dot = |u: &[Complex64], v: &[Complex64]| -> Complex64 {
        u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
    };
    let mut gram = vec![vec![Complex64::default(); p]; p];
    let mut rhs = vec![Complex64::default(); p];
    for a in 0..p {
        for b in 0..p {
            gram[a][b] = dot(&cols[a], &cols[b]);
        }
        rhs[a] = dot(&cols[a], y);
    }
    let coef = solve_dense_complex(gram, rhs)?;
    let mut ss = 0.0;
    for j in 0..n {
        let mut fit = Complex64::default();
        for k in 0..p {
            fit += coef[k] * cols[k][j];
        }
        ss += (y[j] - fit).norm_sqr();
    }
    Ok((coef[0] / scales[0], (ss / n as f64).sqrt()))
}

/// Least squares with two complex basis functions: fits
/// `y_k ~ c0 * f0(x_k) + c1 * f1(x_k)` and returns `(c0, c1, rms residual)`.
pub fn lsq_two_basis_complex(
    basis0: &[Complex64],
    basis1: &[Complex64],
    y: &[Complex64],
) -> Result<(Complex64, Complex64, f64)> {
    let n = y.len();
    if n < 2 || basis0.len() != n || basis1.len() != n {
        return Err(Error::Contract("need at least two samples for a two-parameter fit".into()));
    }
    // normal equations with conjugate inner products
    let dot = |u: &[Complex64], v: &[Complex64]| -> Complex64 {
        u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
    };
    let g00 = dot(basis0, basis0);
    let g01 = dot(basis0, basis1);
    let g11 = dot(basis1, basis1);
    let r0 = dot(basis0, y);
    let r1 = dot(basis1, y);
    let det = g00 * g11 - g01 * g01.conj();
    if det.norm() < 1e-300 {
        return Err(Error::Degenerate("collinear basis in least squares".into()));
    }
    let c0 = (r0 * g11 - g01 * r1) / det;
    let c1 = (g00 * r1 - g01.conj() * r0) / det;
    let mut ss = 0.0;
    for k in 0..n {
        ss += (y[k] - c0 * basis0[k] - c1 * basis1[k]).norm_sqr();
    }
    Ok((c0, c1, (ss / n as f64).sqrt()))
}

/// Ordinary linear regression `y ~ slope * x + intercept`;
/// returns `(slope, intercept, rms residual)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::Contract("need at least two points for a line fit".into()));
    }
    let nf = n as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let det = nf * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return Err(Error::Degenerate("degenerate abscissae in line fit".into()));
    }
    let slope = (nf * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / nf;
    let mut ss = 0.0;
    for k in 0..n {
        let r = y[k] - slope * x[k] - intercept;
        ss += r * r;
    }
    Ok((slope, intercept, (ss / nf).sqrt()))
}

/// Log-log slope of an error envelope: bins the samples in log-x, takes the
/// largest value per bin (errors oscillate through zeros), then fits a line.
pub fn envelope_slope(x: &[f64], err: &[f64], n_bins: usize) -> Result<f64> {
    if x.len() != err.len() || x.len() < 4 {
        return Err(Error::Contract("need at least four samples for an envelope fit".into()));
    }
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min).ln();
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max).ln();
    if !(hi > lo) {
        return Err(Error::Degenerate("degenerate sweep range".into()));
    }
    let mut best = vec![f64::NEG_INFINITY; n_bins];
    let mut pos = vec![0.0f64; n_bins];
    for (&xv, &ev) in x.iter().zip(err) {
        let t = ((xv.ln() - lo) / (hi - lo) * n_bins as f64).floor() as usize;
        let b = t.min(n_bins - 1);
        if ev > best[b] {
            best[b] = ev;
            pos[b] = xv;
        }
    }
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for b in 0..n_bins {
        if best[b] > 0.0 && best[b].is_finite() {
            lx.push(pos[b].ln());
            ly.push(best[b].ln());
        }
    }
    if lx.len() < 3 {
        return Err(Error::Degenerate("too few nonzero error bins for a slope fit".into()));
    }
    let (slope, _, _) = linear_fit(&lx, &ly)?;
    Ok(slope)
}

/// Illinois-variant false position on a sign-changing bracket; the bracket
/// is preserved, so this always converges for a continuous function.
pub fn refine_bracket(
    f: &impl Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    mut flo: f64,
    mut fhi: f64,
) -> Result<f64> {
    for _ in 0..200 {
        if (hi - lo).abs() < 1e-10 * (1.0 + hi.abs()) {
            break;
        }
        let mid = (lo * fhi - hi * flo) / (fhi - flo);
        let mid = if mid <= lo || mid >= hi { 0.5 * (lo + hi) } else { mid };
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if flo * fm < 0.0 {
            hi = mid;
            fhi = fm;
            flo *= 0.5;
        } else {
            lo = mid;
            flo = fm;
            fhi *= 0.5;
        }
        if flo.abs() < 1e-300 || fhi.abs() < 1e-300 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Terminate when the step's relative size falls below this.
    pub step_tol: f64,
    /// Terminate when the objective falls below this.
    pub objective_tol: f64,
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions { max_iterations: 200, step_tol: 1e-12, objective_tol: 1e-24, fd_step: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub struct LmResult {
    pub x: Vec<f64>,
    /// `(iteration, objective, gradient infinity norm)` per accepted step.
    pub history: Vec<(usize, f64, f64)>,
    pub converged: bool,
    /// Ten successive iterations without objective decrease.
    pub stagnated: bool,
}

/// Levenberg-Marquardt on a real residual vector with forward-difference
/// Jacobians. Residual evaluations may fail (e.g. a pole was hit); the step
/// is then rejected and the damping increased.
pub fn levenberg_marquardt(
    residuals: impl Fn(&[f64]) -> Result<Vec<f64>>,
    x0: &[f64],
    opts: &LmOptions,
) -> Result<LmResult> {
    let mut x = x0.to_vec();
    let n = x.len();
    let mut r = residuals(&x)?;
    let m = r.len();
    if m < n {
        return Err(Error::Contract(format!("{m} residuals cannot determine {n} parameters")));
    }
    let mut obj: f64 = r.iter().map(|v| v * v).sum();
    let mut mu = 1e-3;
    let mut history: Vec<(usize, f64, f64)> = Vec::new();
    let mut converged = false;
    let mut no_progress = 0usize;
    let mut last_grad = f64::NAN;

    for iter in 0..opts.max_iterations {
        // central-difference Jacobian, column by column
        let mut jt_j = vec![vec![0.0; n]; n];
        let mut jt_r = vec![0.0; n];
        let mut jac = vec![vec![0.0; m]; n];
        for j in 0..n {
            let h = opts.fd_step * (1.0 + x[j].abs());
            let mut xp = x.clone();
            xp[j] += h;
            let rp = residuals(&xp)?;
            let mut xm = x.clone();
            xm[j] -= h;
            let rm = residuals(&xm)?;
            for k in 0..m {
                jac[j][k] = (rp[k] - rm[k]) / (2.0 * h);
            }
        }
        for a in 0..n {
            for b in a..n {
                let s: f64 = (0..m).map(|k| jac[a][k] * jac[b][k]).sum();
                jt_j[a][b] = s;
                jt_j[b][a] = s;
            }
            jt_r[a] = (0..m).map(|k| jac[a][k] * r[k]).sum();
        }
        let grad_norm = jt_r.iter().fold(0.0f64, |mx, v| mx.max(2.0 * v.abs()));
        history.push((iter, obj, grad_norm));
        last_grad = grad_norm;

        if obj <= opts.objective_tol {
            converged = true;
            break;
        }

        // inner damping loop
        let mut accepted = false;
        for _ in 0..25 {
            let mut lhs = jt_j.clone();
            for d in 0..n {
                lhs[d][d] += mu * (jt_j[d][d].max(1e-12));
            }
            let rhs: Vec<f64> = jt_r.iter().map(|v| -v).collect();
            let Ok(step) = solve_dense(lhs, rhs) else {
                mu *= 10.0;
                continue;
            };
            let xt: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a + d).collect();
            match residuals(&xt) {
                Ok(rt) => {
                    let ot: f64 = rt.iter().map(|v| v * v).sum();
                    if ot < obj {
                        let step_size = step
                            .iter()
                            .zip(&x)
                            .fold(0.0f64, |mx, (d, xv)| mx.max(d.abs() / (1.0 + xv.abs())));
                        x = xt;
                        r = rt;
                        let improved = (obj - ot) > 1e-15 * obj.max(1e-300);
                        obj = ot;
                        mu = (mu * 0.3).max(1e-14);
                        accepted = true;
                        if improved {
                            no_progress = 0;
                        } else {
                            no_progress += 1;
                        }
                        if step_size < opts.step_tol {
                            converged = true;
                        }
                        break;
                    }
                    mu *= 10.0;
                }
                Err(_) => mu *= 10.0,
            }
            if mu > 1e14 {
                break;
            }
        }
        if !accepted {
            no_progress += 1;
        }
        if converged || no_progress >= 10 {
            break;
        }
    }
    let stagnated = no_progress >= 10 && !converged;
    history.push((history.len(), obj, last_grad));
    Ok(LmResult { x, history, converged, stagnated })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_solver() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve_dense(a, vec![5.0, 10.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn line_fit_exact() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let (s, c, r) = linear_fit(&x, &y).unwrap();
        assert!((s - 2.5).abs() < 1e-12 && (c + 1.0).abs() < 1e-12 && r < 1e-12);
    }

    #[test]
    fn complex_tail_fit() {
        // y = C + c / x with complex c
        let xs: Vec<f64> = (10..40).map(|k| k as f64).collect();
        let c_true = Complex64::new(0.3, -1.1);
        let y: Vec<Complex64> =
            xs.iter().map(|&x| Complex64::new(-0.6, 0.0) + c_true / x).collect();
        let ones: Vec<Complex64> = xs.iter().map(|_| Complex64::new(1.0, 0.0)).collect();
        let inv: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(1.0 / x, 0.0)).collect();
        let (c0, c1, rms) = lsq_two_basis_complex(&ones, &inv, &y).unwrap();
        assert!((c0 - Complex64::new(-0.6, 0.0)).norm() < 1e-12);
        assert!((c1 - c_true).norm() < 1e-10);
        assert!(rms < 1e-12);
    }

    #[test]
    fn lm_solves_small_nonlinear_problem() {
        // recover (a, b) from y = a * exp(b * t)
        let t: Vec<f64> = (0..20).map(|k| k as f64 * 0.1).collect();
        let data: Vec<f64> = t.iter().map(|&tv| 2.0 * (-1.3 * tv).exp()).collect();
        let res = |p: &[f64]| -> Result<Vec<f64>> {
            Ok(t.iter()
                .zip(&data)
                .map(|(&tv, &d)| p[0] * (p[1] * tv).exp() - d)
                .collect())
        };
        let out = levenberg_marquardt(res, &[1.0, -0.5], &LmOptions::default()).unwrap();
        assert!(out.converged, "history: {:?}", out.history);
        assert!((out.x[0] - 2.0).abs() < 1e-8);
        assert!((out.x[1] + 1.3).abs() < 1e-8);
    }

    #[test]
    fn envelope_slope_of_power_law() {
        let x: Vec<f64> = (1..200).map(|k| 1000.0 * 1.05f64.powi(k)).collect();
        // err ~ x^{-1} with an oscillating modulation
        let err: Vec<f64> =
            x.iter().map(|&v| (1.0 / v) * (0.2 + (v.ln() * 10.0).sin().abs())).collect();
        let s = envelope_slope(&x, &err, 10).unwrap();
        assert!((s + 1.0).abs() < 0.15, "slope {s}");
    }
}
