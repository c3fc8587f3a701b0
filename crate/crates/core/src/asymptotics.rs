//! Numerical validation of the large-parameter asymptotics: leading terms of
//! the fundamental solutions `w2` and `v` in every transfer-matrix case,
//! lower bounds on `|Delta|` along rectangular contours in the
//! `S sqrt(lambda)`-plane, and the decay of the solution combinations that
//! enter the uniqueness argument.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::envelope_slope;
use crate::ode::OdeOptions;
use crate::potential::PotentialGrid;
use crate::special::{cos_sqrt, sinc_sqrt};
use crate::transfer::TransferMatrix;
use crate::weyl::{v_solution, w2_solution};

/// Which leading-term family to validate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeadingFamily {
    W2,
    W2Prime,
    V,
    VPrime,
}

fn m12_vanishes(m: &TransferMatrix) -> bool {
    m.m12().abs() < 1e-14
}

/// Leading term of `w2(x, lambda)`; dispatches on the sign of `x` and on
/// whether `m12` vanishes. All terms are entire in `lambda`.
pub fn w2_leading(m: &TransferMatrix, s: f64, x: f64, lambda: Complex64) -> Complex64 {
    if x < 0.0 {
        sinc_sqrt(lambda, x + s)
    } else if m12_vanishes(m) {
        m.m11() * sinc_sqrt(lambda, s) * cos_sqrt(lambda, x)
            + m.m22() * sinc_sqrt(lambda, x) * cos_sqrt(lambda, s)
    } else {
        m.m12() * cos_sqrt(lambda, s) * cos_sqrt(lambda, x)
    }
}

/// Leading term of `w2'(x, lambda)`.
pub fn w2_prime_leading(m: &TransferMatrix, s: f64, x: f64, lambda: Complex64) -> Complex64 {
    if x < 0.0 {
        cos_sqrt(lambda, x + s)
    } else if m12_vanishes(m) {
        -m.m11() * lambda * sinc_sqrt(lambda, s) * sinc_sqrt(lambda, x)
            + m.m22() * cos_sqrt(lambda, s) * cos_sqrt(lambda, x)
    } else {
        -m.m12() * cos_sqrt(lambda, s) * lambda * sinc_sqrt(lambda, x)
    }
}

/// Leading term of `v(x, lambda)` (terminal data at `x = S`).
pub fn v_leading(m: &TransferMatrix, s: f64, x: f64, lambda: Complex64) -> Complex64 {
    if x > 0.0 {
        -sinc_sqrt(lambda, s - x)
    } else if m12_vanishes(m) {
        -m.m22() * sinc_sqrt(lambda, s) * cos_sqrt(lambda, x)
            + m.m11() * sinc_sqrt(lambda, x) * cos_sqrt(lambda, s)
    } else {
        -m.m12() * cos_sqrt(lambda, s) * cos_sqrt(lambda, x)
    }
}

/// Leading term of `v'(x, lambda)`.
pub fn v_prime_leading(m: &TransferMatrix, s: f64, x: f64, lambda: Complex64) -> Complex64 {
    if x > 0.0 {
        cos_sqrt(lambda, s - x)
    } else if m12_vanishes(m) {
        m.m22() * lambda * sinc_sqrt(lambda, s) * sinc_sqrt(lambda, x)
            + m.m11() * cos_sqrt(lambda, s) * cos_sqrt(lambda, x)
    } else {
        m.m12() * lambda * cos_sqrt(lambda, s) * sinc_sqrt(lambda, x)
    }
}

pub fn leading_term(
    family: LeadingFamily,
    m: &TransferMatrix,
    s: f64,
    x: f64,
    lambda: Complex64,
) -> Complex64 {
    match family {
        LeadingFamily::W2 => w2_leading(m, s, x, lambda),
        LeadingFamily::W2Prime => w2_prime_leading(m, s, x, lambda),
        LeadingFamily::V => v_leading(m, s, x, lambda),
        LeadingFamily::VPrime => v_prime_leading(m, s, x, lambda),
    }
}

/// Result of a decay-order regression; `exact` is set when the residuals sit
/// at integrator noise and no slope is defined.
#[derive(Debug, Clone)]
pub struct SlopeReport {
    pub slope: Option<f64>,
    pub exact: bool,
    pub lambdas: Vec<f64>,
    pub errors: Vec<f64>,
}

/// Fits the log-log decay of `|exact - leading|` over a real lambda sweep.
pub fn asymptotic_error_slope(
    q: &PotentialGrid,
    m: &TransferMatrix,
    x: f64,
    family: LeadingFamily,
    lambda_sweep: &[f64],
    opts: &OdeOptions,
) -> Result<SlopeReport> {
    let s = q.support();
    if x.abs() > s {
        return Err(Error::Contract("evaluation point must lie inside the support".into()));
    }
    let rows: Vec<(f64, f64)> = lambda_sweep
        .par_iter()
        .map(|&lr| {
            let lambda = Complex64::new(lr, 0.0);
            let exact = match family {
                LeadingFamily::W2 => w2_solution(q, m, lambda, &[x], opts)?.y[0],
                LeadingFamily::W2Prime => w2_solution(q, m, lambda, &[x], opts)?.yp[0],
                LeadingFamily::V => v_solution(q, m, lambda, &[x], opts)?.y[0],
                LeadingFamily::VPrime => v_solution(q, m, lambda, &[x], opts)?.yp[0],
            };
            let lead = leading_term(family, m, s, x, lambda);
            Ok((lr, ((exact - lead).norm(), exact.norm())))
        })
        .collect::<Result<Vec<(f64, (f64, f64))>>>()?
        .into_iter()
        .map(|(lr, (e, _))| (lr, e))
        .collect();
    let lambdas: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let errors: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let scale = errors.iter().cloned().fold(0.0f64, f64::max);
    if scale < 1e-8 {
        return Ok(SlopeReport { slope: None, exact: true, lambdas, errors });
    }
    let slope = envelope_slope(&lambdas, &errors, 10)?;
    Ok(SlopeReport { slope: Some(slope), exact: false, lambdas, errors })
}

/// Log-spaced sweep used by the slope checks.
pub fn lambda_sweep(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}

/// Contour family in the `z = S sqrt(lambda)` plane: three legs of a
/// rectangle with vertical extent `+-ik` and the right leg placed where the
/// relevant trigonometric factor is bounded away from zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourKind {
    /// `m12 = 0`: right leg at `Re z = pi/4 + 2 k pi`.
    Gamma,
    /// `m12 != 0`: right leg at `Re z = 2 k pi`.
    Upsilon,
}

#[derive(Debug, Clone)]
pub struct ContourSpec {
    pub kind: ContourKind,
    pub k: u32,
    pub samples: Vec<Complex64>,
}

impl ContourSpec {
    pub fn new(kind: ContourKind, k: u32, n_per_leg: usize) -> Result<Self> {
        if k == 0 || n_per_leg < 2 {
            return Err(Error::Contract("contour needs k >= 1 and at least two samples".into()));
        }
        let right = match kind {
            ContourKind::Gamma => std::f64::consts::PI / 4.0 + 2.0 * k as f64 * std::f64::consts::PI,
            ContourKind::Upsilon => 2.0 * k as f64 * std::f64::consts::PI,
        };
        let kk = k as f64;
        // Chebyshev clustering toward the leg ends
        let u = |j: usize| {
            0.5 * (1.0 - (std::f64::consts::PI * j as f64 / (n_per_leg - 1) as f64).cos())
        };
        let mut samples = Vec::with_capacity(3 * n_per_leg);
        for j in 0..n_per_leg {
            samples.push(Complex64::new(u(j) * right, -kk));
        }
        for j in 1..n_per_leg {
            samples.push(Complex64::new(right, -kk + 2.0 * kk * u(j)));
        }
        for j in 1..n_per_leg {
            samples.push(Complex64::new((1.0 - u(j)) * right, kk));
        }
        Ok(ContourSpec { kind, k, samples })
    }

    pub fn right_leg_re(&self) -> f64 {
        match self.kind {
            ContourKind::Gamma => {
                std::f64::consts::PI / 4.0 + 2.0 * self.k as f64 * std::f64::consts::PI
            }
            ContourKind::Upsilon => 2.0 * self.k as f64 * std::f64::consts::PI,
        }
    }

    /// Spectral points `lambda = (z/S)^2`.
    pub fn lambdas(&self, s: f64) -> Vec<Complex64> {
        self.samples.iter().map(|z| (z / s) * (z / s)).collect()
    }
}

fn kind_for(m: &TransferMatrix) -> ContourKind {
    if m12_vanishes(m) {
        ContourKind::Gamma
    } else {
        ContourKind::Upsilon
    }
}

/// The claimed envelope of `1/|Delta|` on the contour, without constant.
fn delta_bound(kind: ContourKind, s: f64, z: Complex64) -> f64 {
    let lambda_abs = (z / s).norm_sqr();
    let decay = (-2.0 * z.im.abs()).exp(); // e^{-2 S |Im sqrt(lambda)|}
    match kind {
        ContourKind::Gamma => lambda_abs.sqrt() * decay,
        ContourKind::Upsilon => decay,
    }
}

/// Max over one contour of `(1/|Delta|) / bound`.
pub fn delta_bound_ratio(
    q: &PotentialGrid,
    m: &TransferMatrix,
    contour: &ContourSpec,
    opts: &OdeOptions,
) -> Result<f64> {
    if contour.kind != kind_for(m) {
        return Err(Error::Contract(
            "contour kind does not match the transfer-matrix case".into(),
        ));
    }
    let s = q.support();
    let ratios: Vec<f64> = contour
        .samples
        .par_iter()
        .map(|&z| {
            let lambda = (z / s) * (z / s);
            let mut delta = crate::weyl::delta_at(q, m, lambda, opts)?;
            if delta.norm() < 1e-290 {
                // sample accidentally close to a characteristic zero; nudge it
                let z2 = z + Complex64::new(2e-3, 1e-3);
                delta = crate::weyl::delta_at(q, m, (z2 / s) * (z2 / s), opts)?;
            }
            let bound = delta_bound(contour.kind, s, z);
            Ok(1.0 / (delta.norm() * bound))
        })
        .collect::<Result<_>>()?;
    Ok(ratios.into_iter().fold(0.0f64, f64::max))
}

#[derive(Debug, Clone)]
pub struct DeltaBoundReport {
    /// `(k, max ratio over the contour)` per contour index.
    pub per_k: Vec<(u32, f64)>,
    /// Ratio at the smallest k, used as the constant calibration.
    pub calibration: f64,
    /// Largest `ratio / calibration` over the family.
    pub max_factor: f64,
}

/// Sweeps the contour family and reports how far the ratio drifts from its
/// calibration at the smallest index; boundedness is the claim under test.
pub fn delta_bound_check(
    q: &PotentialGrid,
    m: &TransferMatrix,
    ks: std::ops::RangeInclusive<u32>,
    n_per_leg: usize,
    opts: &OdeOptions,
) -> Result<DeltaBoundReport> {
    let kind = kind_for(m);
    let mut per_k = Vec::new();
    for k in ks {
        let contour = ContourSpec::new(kind, k, n_per_leg)?;
        per_k.push((k, delta_bound_ratio(q, m, &contour, opts)?));
    }
    if per_k.is_empty() {
        return Err(Error::Contract("empty contour range".into()));
    }
    let calibration = per_k[0].1;
    let max_factor =
        per_k.iter().map(|&(_, r)| r / calibration).fold(0.0f64, f64::max);
    Ok(DeltaBoundReport { per_k, calibration, max_factor })
}

#[derive(Debug, Clone)]
pub struct DecayFit {
    pub slope: Option<f64>,
    pub exact: bool,
    /// `(lambda scale, max combination ratio)` per contour index.
    pub per_k: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct PEntryDecayReport {
    /// `[w2 (v~' - v') - v (w2~' - w2')] / |Delta|`, expected O(1/sqrt(lambda)).
    pub p11: DecayFit,
    /// `[v w2~ - v~ w2] / |Delta|`, expected O(1/lambda).
    pub p12: DecayFit,
}

/// Decay of the two solution combinations over the contour family, for a
/// pair of potentials sharing the support bound and the transfer matrix.
pub fn p_entry_decay(
    q: &PotentialGrid,
    q_tilde: &PotentialGrid,
    m: &TransferMatrix,
    ks: std::ops::RangeInclusive<u32>,
    n_per_leg: usize,
    xs: &[f64],
    opts: &OdeOptions,
) -> Result<PEntryDecayReport> {
    let s = q.support();
    if (q_tilde.support() - s).abs() > 1e-12 {
        return Err(Error::Contract("both potentials must share the support bound".into()));
    }
    let kind = kind_for(m);
    let mut xs_and_s: Vec<f64> = xs.to_vec();
    xs_and_s.push(s);
    let mut per_k_p11 = Vec::new();
    let mut per_k_p12 = Vec::new();
    for k in ks {
        let contour = ContourSpec::new(kind, k, n_per_leg)?;
        let lam_scale = (contour.right_leg_re() / s).powi(2);
        let maxima: Vec<(f64, f64)> = contour
            .samples
            .par_iter()
            .map(|&z| {
                let lambda = (z / s) * (z / s);
                let w2a = w2_solution(q, m, lambda, &xs_and_s, opts)?;
                let w2b = w2_solution(q_tilde, m, lambda, &xs_and_s, opts)?;
                let va = v_solution(q, m, lambda, xs, opts)?;
                let vb = v_solution(q_tilde, m, lambda, xs, opts)?;
                let delta = w2a.y[xs.len()].norm();
                if delta == 0.0 {
                    return Err(Error::Degenerate("Delta zero on decay contour".into()));
                }
                let mut p11 = 0.0f64;
                let mut p12 = 0.0f64;
                for j in 0..xs.len() {
                    let c12 = va.y[j] * w2b.y[j] - vb.y[j] * w2a.y[j];
                    let c11 = w2a.y[j] * (vb.yp[j] - va.yp[j]) - va.y[j] * (w2b.yp[j] - w2a.yp[j]);
                    p12 = p12.max(c12.norm() / delta);
                    p11 = p11.max(c11.norm() / delta);
                }
                Ok((p11, p12))
            })
            .collect::<Result<_>>()?;
        let p11_max = maxima.iter().map(|v| v.0).fold(0.0f64, f64::max);
        let p12_max = maxima.iter().map(|v| v.1).fold(0.0f64, f64::max);
        per_k_p11.push((lam_scale, p11_max));
        per_k_p12.push((lam_scale, p12_max));
    }
    let fit = |per_k: &[(f64, f64)]| -> Result<DecayFit> {
        let top = per_k.iter().map(|v| v.1).fold(0.0f64, f64::max);
        if top < 1e-10 {
            return Ok(DecayFit { slope: None, exact: true, per_k: per_k.to_vec() });
        }
        let lx: Vec<f64> = per_k.iter().map(|v| v.0.ln()).collect();
        let ly: Vec<f64> = per_k.iter().map(|v| v.1.max(1e-300).ln()).collect();
        let (slope, _, _) = crate::fit::linear_fit(&lx, &ly)?;
        Ok(DecayFit { slope: Some(slope), exact: false, per_k: per_k.to_vec() })
    };
    Ok(PEntryDecayReport { p11: fit(&per_k_p11)?, p12: fit(&per_k_p12)? })
}

/// One pass/fail row of the validation suite.
#[derive(Debug, Clone)]
pub struct SuiteEntry {
    pub tag: String,
    /// Fitted slope or ratio factor; absent when the residual is exact zero.
    pub value: Option<f64>,
    /// Upper bound the value must stay below.
    pub band: f64,
    pub pass: bool,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub entries: Vec<SuiteEntry>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }
}

/// Deterministic companion potential for the two-potential decay checks.
pub fn companion_potential(q: &PotentialGrid) -> Result<PotentialGrid> {
    let s = q.support();
    if q.nodes().is_empty() {
        return PotentialGrid::from_fn(s, 0.8 * s, 101, move |x| {
            0.4 * (1.0 - (x / (0.8 * s)).powi(2))
        });
    }
    let values: Vec<f64> = q
        .nodes()
        .iter()
        .zip(q.values())
        .map(|(&x, &v)| 0.7 * v + 0.25 * (std::f64::consts::PI * x / (2.0 * s)).cos())
        .collect();
    PotentialGrid::new(s, q.nodes().to_vec(), values, q.interpolation())
}

/// Runs every validation check for one `(q, M)` configuration and an
/// auxiliary companion potential. `k_max` bounds the contour family index
/// (20 for the full check).
pub fn appendix_suite(
    q: &PotentialGrid,
    m: &TransferMatrix,
    k_max: u32,
    opts: &OdeOptions,
) -> Result<SuiteReport> {
    let s = q.support();
    let slope_band = |offdiag: bool| if offdiag { -0.25 } else { -0.75 };
    let offdiag = !m12_vanishes(m);
    let sweep = lambda_sweep(1e3, 1e6, 40);
    // the residuals under test reach the 1e-6 scale at the top of the sweep,
    // so the slope fits need a tighter integrator than the contour checks
    let slope_opts = OdeOptions::with_tol(opts.abs_tol.min(opts.rel_tol).min(1e-11));
    let mut entries = Vec::new();

    let mut push_slope = |tag: &str, rep: SlopeReport, band: f64| {
        let pass = rep.exact || rep.slope.map(|sl| sl <= band).unwrap_or(false);
        entries.push(SuiteEntry {
            tag: tag.to_string(),
            value: rep.slope,
            band,
            pass,
            note: if rep.exact {
                "leading term exact at integrator noise".into()
            } else {
                String::new()
            },
        });
    };

    // interior leading terms carry the matrix; their order depends on the case
    let rep = asymptotic_error_slope(q, m, 0.35 * s, LeadingFamily::W2, &sweep, &slope_opts)?;
    push_slope("w2_right_leading_slope", rep, slope_band(offdiag));
    let rep = asymptotic_error_slope(q, m, -0.45 * s, LeadingFamily::W2, &sweep, &slope_opts)?;
    push_slope("w2_left_leading_slope", rep, -0.75);
    let rep = asymptotic_error_slope(q, m, -0.35 * s, LeadingFamily::V, &sweep, &slope_opts)?;
    push_slope("v_left_leading_slope", rep, slope_band(offdiag));
    let rep = asymptotic_error_slope(q, m, 0.45 * s, LeadingFamily::V, &sweep, &slope_opts)?;
    push_slope("v_right_leading_slope", rep, -0.75);

    let k_lo = 5u32.min(k_max.saturating_sub(1).max(1));
    let bound = delta_bound_check(q, m, k_lo..=k_max, 200, opts)?;
    entries.push(SuiteEntry {
        tag: "delta_inverse_bound_factor".into(),
        value: Some(bound.max_factor),
        band: 3.0,
        pass: bound.max_factor <= 3.0,
        note: format!("calibration at k = {k_lo}: {:.3e}", bound.calibration),
    });

    let companion = companion_potential(q)?;
    let xs = [-0.6 * s, -0.2 * s, 0.3 * s, 0.7 * s];
    let decay = p_entry_decay(q, &companion, m, k_lo..=k_max, 200, &xs, opts)?;
    let p11_pass = decay.p11.exact || decay.p11.slope.map(|sl| sl <= -0.2).unwrap_or(false);
    entries.push(SuiteEntry {
        tag: "p11_combination_slope".into(),
        value: decay.p11.slope,
        band: -0.2,
        pass: p11_pass,
        note: if decay.p11.exact { "identical potentials".into() } else { String::new() },
    });
    let p12_pass = decay.p12.exact || decay.p12.slope.map(|sl| sl <= -0.7).unwrap_or(false);
    entries.push(SuiteEntry {
        tag: "p12_combination_slope".into(),
        value: decay.p12.slope,
        band: -0.7,
        pass: p12_pass,
        note: if decay.p12.exact { "identical potentials".into() } else { String::new() },
    });

    Ok(SuiteReport { entries })
}
