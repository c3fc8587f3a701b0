//! Propagation kernel for `-y'' + q(x) y = zeta^2 y` as the first-order
//! system `(y, y')`. The workhorse is an adaptive embedded Runge-Kutta pair
//! (Dormand-Prince 5(4)); piecewise-constant potentials additionally get an
//! exact per-cell 2x2 transfer-product path.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::{Interpolation, PotentialGrid};
use crate::special::{cos_sqrt_z, sinc_sqrt_z};
use crate::state::StateVector;

/// Integrator tolerances. Both apply per step, component-wise.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { abs_tol: 1e-10, rel_tol: 1e-10, max_steps: 10_000_000 }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions { abs_tol: tol, rel_tol: tol, ..Default::default() }
    }
}

fn check_interval(from_x: f64, to_x: f64, init: &StateVector) -> Result<()> {
    if (init.x - from_x).abs() > 1e-12 * (1.0 + from_x.abs()) {
        return Err(Error::Contract(format!(
            "initial state is at x = {}, expected from_x = {}",
            init.x, from_x
        )));
    }
    let (lo, hi) = if from_x < to_x { (from_x, to_x) } else { (to_x, from_x) };
    if lo < 0.0 && hi > 0.0 {
        return Err(Error::Contract(
            "propagation interval straddles the origin; apply the transfer condition explicitly"
                .into(),
        ));
    }
    if !init.is_finite() {
        return Err(Error::Contract("non-finite initial state".into()));
    }
    Ok(())
}

/// Integrates the state from `from_x` to `to_x`. The interval must not
/// straddle the origin. Splits at potential grid nodes so that each
/// Runge-Kutta segment sees a smooth right-hand side.
pub fn propagate(
    q: &PotentialGrid,
    zeta: Complex64,
    from_x: f64,
    to_x: f64,
    init: &StateVector,
    opts: &OdeOptions,
) -> Result<StateVector> {
    check_interval(from_x, to_x, init)?;
    let lambda = zeta * zeta;
    let mut y = [init.y, init.yp];
    let mut x = from_x;
    for stop in q.breakpoints(from_x, to_x).into_iter().chain(std::iter::once(to_x)) {
        if (stop - x).abs() < 1e-15 * (1.0 + x.abs()) {
            x = stop;
            continue;
        }
        y = dopri5(|t| Complex64::new(q.value_at(t), 0.0) - lambda, x, stop, y, opts)?;
        x = stop;
    }
    Ok(StateVector::new(y[0], y[1], to_x, zeta))
}

/// Exact propagation for piecewise-constant potentials: the solution on each
/// cell is a closed-form 2x2 matrix, so no integration error at all. Serves
/// as the independent oracle for [`propagate`].
pub fn propagate_cells(
    q: &PotentialGrid,
    zeta: Complex64,
    from_x: f64,
    to_x: f64,
    init: &StateVector,
) -> Result<StateVector> {
    if q.interpolation() != Interpolation::PiecewiseConstant {
        return Err(Error::Contract(
            "exact cell propagation requires a piecewise-constant potential".into(),
        ));
    }
    check_interval(from_x, to_x, init)?;
    let lambda = zeta * zeta;
    let mut y = [init.y, init.yp];
    let mut x = from_x;
    for stop in q.breakpoints(from_x, to_x).into_iter().chain(std::iter::once(to_x)) {
        let h = stop - x;
        if h != 0.0 {
            let qc = q.value_at(0.5 * (x + stop));
            y = cell_step(lambda - qc, h, y);
        }
        x = stop;
    }
    Ok(StateVector::new(y[0], y[1], to_x, zeta))
}

/// Closed-form free propagation (`q = 0`) over any interval not straddling 0.
pub fn free_propagate(
    zeta: Complex64,
    from_x: f64,
    to_x: f64,
    init: &StateVector,
) -> Result<StateVector> {
    check_interval(from_x, to_x, init)?;
    let y = cell_step(zeta * zeta, to_x - from_x, [init.y, init.yp]);
    Ok(StateVector::new(y[0], y[1], to_x, zeta))
}

/// One constant-coefficient step: `y'' = -(lambda - q) y` over a signed step
/// `h`, evaluated through entire functions of `(lambda - q) h^2`.
fn cell_step(lambda_minus_q: Complex64, h: f64, y: [Complex64; 2]) -> [Complex64; 2] {
    let z = lambda_minus_q * h * h;
    let c = cos_sqrt_z(z);
    let s = h * sinc_sqrt_z(z);
    [c * y[0] + s * y[1], -lambda_minus_q * s * y[0] + c * y[1]]
}

// Dormand-Prince 5(4) coefficients.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// fifth-order solution minus fourth-order embedded solution
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive integration of `y1' = y2`, `y2' = w(x) y1` over `[a, b]`
/// (either direction). `w` must be smooth on the open interval.
fn dopri5(
    w: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    y0: [Complex64; 2],
    opts: &OdeOptions,
) -> Result<[Complex64; 2]> {
    let rhs = |x: f64, y: [Complex64; 2]| -> [Complex64; 2] { [y[1], w(x) * y[0]] };
    let span = b - a;
    let dir = span.signum();
    let mut x = a;
    let mut y = y0;
    // initial step guess from the local frequency scale
    let scale = w(a + 0.5 * span).norm().sqrt().max(1.0);
    let mut h = (0.1 / scale).min(span.abs()) * dir;
    let h_min = 1e-14 * (1.0 + span.abs());
    let mut k1 = rhs(x, y);
    let mut steps = 0usize;

    while (b - x) * dir > 0.0 {
        if h.abs() < h_min {
            return Err(Error::Integration(format!(
                "step size underflow at x = {x} (h = {h:.3e}, span {span:.3e})"
            )));
        }
        if steps >= opts.max_steps {
            return Err(Error::Integration(format!(
                "step budget exhausted after {steps} steps at x = {x}"
            )));
        }
        steps += 1;
        if (b - x) * dir < h.abs() {
            h = b - x;
        }

        let mut k = [[Complex64::new(0.0, 0.0); 2]; 7];
        k[0] = k1;
        for stage in 0..6 {
            let mut ys = y;
            for j in 0..=stage {
                let a_sj = A[stage][j];
                if a_sj != 0.0 {
                    ys[0] += h * a_sj * k[j][0];
                    ys[1] += h * a_sj * k[j][1];
                }
            }
            k[stage + 1] = rhs(x + C[stage] * h, ys);
        }
        // k[6] is the FSAL stage: the fifth-order solution equals the state
        // it was evaluated at.
        let mut y5 = y;
        for j in 0..6 {
            let a_j = A[5][j];
            if a_j != 0.0 {
                y5[0] += h * a_j * k[j][0];
                y5[1] += h * a_j * k[j][1];
            }
        }
        let mut err = [Complex64::new(0.0, 0.0); 2];
        for j in 0..7 {
            if E[j] != 0.0 {
                err[0] += E[j] * k[j][0];
                err[1] += E[j] * k[j][1];
            }
        }
        let mut err_norm = 0.0f64;
        for i in 0..2 {
            let sc = opts.abs_tol + opts.rel_tol * y[i].norm().max(y5[i].norm());
            err_norm = err_norm.max((h * err[i]).norm() / sc);
        }

        if err_norm <= 1.0 {
            x += h;
            y = y5;
            k1 = k[6];
        }
        let factor = if err_norm > 0.0 {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(y: Complex64, yp: Complex64, x: f64, zeta: Complex64) -> StateVector {
        StateVector::new(y, yp, x, zeta)
    }

    #[test]
    fn free_solution_forward() {
        // q = 0, zeta = 1, init (1, i) at 0+ -> (e^{3i}, i e^{3i}) at x = 3
        let q = PotentialGrid::zero(1.0);
        let zeta = Complex64::new(1.0, 0.0);
        let i = Complex64::i();
        let init = state(Complex64::new(1.0, 0.0), i, 0.0, zeta);
        let out = propagate(&q, zeta, 0.0, 3.0, &init, &OdeOptions::default()).unwrap();
        let expect = (i * 3.0).exp();
        assert!((out.y - expect).norm() < 1e-9, "{} vs {}", out.y, expect);
        assert!((out.yp - i * expect).norm() < 1e-9);
    }

    #[test]
    fn free_decaying_solution_backward() {
        // q = 0, zeta = 2i, init (1, -2) at 0- -> (e^2, -2 e^2) at x = -1
        let q = PotentialGrid::zero(1.0);
        let zeta = Complex64::new(0.0, 2.0);
        let init = state(Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.0), 0.0, zeta);
        let out = propagate(&q, zeta, 0.0, -1.0, &init, &OdeOptions::default()).unwrap();
        let e2 = std::f64::consts::E.powi(2);
        assert!((out.y - Complex64::new(e2, 0.0)).norm() < 1e-8);
        assert!((out.yp - Complex64::new(-2.0 * e2, 0.0)).norm() < 2e-8);
    }

    #[test]
    fn matches_cell_oracle_on_well() {
        // q = -1 on [0, 1], zeta = 0.5, init (1, 0) at 0+
        let q = PotentialGrid::new(
            1.0,
            vec![0.0, 1.0],
            vec![-1.0, -1.0],
            Interpolation::PiecewiseConstant,
        )
        .unwrap();
        let zeta = Complex64::new(0.5, 0.0);
        let init = state(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 0.0, zeta);
        let rk = propagate(&q, zeta, 0.0, 1.0, &init, &OdeOptions::default()).unwrap();
        let exact = propagate_cells(&q, zeta, 0.0, 1.0, &init).unwrap();
        assert!((rk.y - exact.y).norm() < 1e-9);
        assert!((rk.yp - exact.yp).norm() < 1e-9);
        // and the closed form: y'' = (q - lambda) y = -1.25 y, k = sqrt(1.25)
        let k = 1.25f64.sqrt();
        assert!((exact.y.re - k.cos()).abs() < 1e-14);
        assert!((exact.yp.re + k * k.sin()).abs() < 1e-14);
    }

    #[test]
    fn straddling_interval_rejected() {
        let q = PotentialGrid::zero(1.0);
        let zeta = Complex64::new(1.0, 0.0);
        let init = state(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), -0.5, zeta);
        assert!(matches!(
            propagate(&q, zeta, -0.5, 0.5, &init, &OdeOptions::default()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn init_position_checked() {
        let q = PotentialGrid::zero(1.0);
        let zeta = Complex64::new(1.0, 0.0);
        let init = state(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 0.3, zeta);
        assert!(propagate(&q, zeta, 0.0, 1.0, &init, &OdeOptions::default()).is_err());
    }

    #[test]
    fn wronskian_constant_along_interval() {
        let q = PotentialGrid::from_fn(1.0, 0.9, 101, |x| 1.4 * (-(x * x) / 0.08).exp()).unwrap();
        let zeta = Complex64::new(1.3, 0.0);
        let opts = OdeOptions::default();
        let u0 = state(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 0.1, zeta);
        let v0 = state(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), 0.1, zeta);
        let w0 = crate::state::wronskian(&u0, &v0).unwrap();
        let u1 = propagate(&q, zeta, 0.1, 0.8, &u0, &opts).unwrap();
        let v1 = propagate(&q, zeta, 0.1, 0.8, &v0, &opts).unwrap();
        let w1 = crate::state::wronskian(&u1, &v1).unwrap();
        assert!((w0 - w1).norm() < 1e-9, "wronskian drifted: {w0} -> {w1}");
    }

    #[test]
    fn conjugate_data_gives_conjugate_solution() {
        // real zeta, real q: conjugating the initial data conjugates the solution
        let q = PotentialGrid::from_cells(1.0, &[0.7, -0.4]).unwrap();
        let zeta = Complex64::new(0.9, 0.0);
        let opts = OdeOptions::default();
        let y0 = Complex64::new(0.4, -0.6);
        let yp0 = Complex64::new(-1.0, 0.3);
        let a = propagate(&q, zeta, 0.2, 1.0, &state(y0, yp0, 0.2, zeta), &opts).unwrap();
        let b =
            propagate(&q, zeta, 0.2, 1.0, &state(y0.conj(), yp0.conj(), 0.2, zeta), &opts).unwrap();
        assert!((a.y.conj() - b.y).norm() < 1e-10);
        assert!((a.yp.conj() - b.yp).norm() < 1e-10);
    }
}
