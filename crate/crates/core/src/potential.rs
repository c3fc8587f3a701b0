use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::{sin_minus_zcos_over_z2, sinc};

/// How samples are interpreted between grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    /// `q(x) = values[i]` on `[nodes[i], nodes[i+1])`.
    PiecewiseConstant,
    /// Linear between nodes.
    PiecewiseLinear,
}

/// Sampled real potential with essential support inside `[-S, S]`.
/// Outside the node range the potential is zero.
#[derive(Debug, Clone)]
pub struct PotentialGrid {
    support: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
    interp: Interpolation,
}

impl PotentialGrid {
    pub fn new(
        support: f64,
        nodes: Vec<f64>,
        values: Vec<f64>,
        interp: Interpolation,
    ) -> Result<Self> {
        if !(support.is_finite() && support > 0.0) {
            return Err(Error::BadPotential(format!(
                "support bound must be finite and positive, got {support}"
            )));
        }
        if nodes.len() != values.len() {
            return Err(Error::BadPotential(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        let slack = 1e-9 * support;
        for w in nodes.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::BadPotential("nodes must be strictly increasing".into()));
            }
        }
        for &x in &nodes {
            if !x.is_finite() || x < -support - slack || x > support + slack {
                return Err(Error::BadPotential(format!(
                    "node {x} outside the support interval [-{support}, {support}]"
                )));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadPotential("non-finite sample value".into()));
        }
        Ok(PotentialGrid { support, nodes, values, interp })
    }

    /// The zero potential with the given support bound.
    pub fn zero(support: f64) -> Self {
        PotentialGrid {
            support,
            nodes: Vec::new(),
            values: Vec::new(),
            interp: Interpolation::PiecewiseConstant,
        }
    }

    /// Uniform piecewise-constant cells spanning the full support interval.
    pub fn from_cells(support: f64, cells: &[f64]) -> Result<Self> {
        if cells.is_empty() {
            return Ok(Self::zero(support));
        }
        let n = cells.len();
        let mut nodes = Vec::with_capacity(n + 1);
        for i in 0..=n {
            nodes.push(-support + 2.0 * support * i as f64 / n as f64);
        }
        let mut values = cells.to_vec();
        values.push(*cells.last().unwrap());
        Self::new(support, nodes, values, Interpolation::PiecewiseConstant)
    }

    /// Samples a function on a uniform grid over `[-hw, hw]`, piecewise linear.
    pub fn from_fn(
        support: f64,
        hw: f64,
        n_nodes: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let mut nodes = Vec::with_capacity(n_nodes);
        let mut values = Vec::with_capacity(n_nodes);
        for i in 0..n_nodes {
            let x = -hw + 2.0 * hw * i as f64 / (n_nodes - 1) as f64;
            nodes.push(x);
            values.push(f(x));
        }
        Self::new(support, nodes, values, Interpolation::PiecewiseLinear)
    }

    pub fn support(&self) -> f64 {
        self.support
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn interpolation(&self) -> Interpolation {
        self.interp
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Piecewise-constant cell values, one per node interval.
    pub fn cell_values(&self) -> &[f64] {
        if self.values.is_empty() {
            &[]
        } else {
            &self.values[..self.values.len() - 1]
        }
    }

    pub fn value_at(&self, x: f64) -> f64 {
        if self.nodes.is_empty() {
            return 0.0;
        }
        let (first, last) = (self.nodes[0], *self.nodes.last().unwrap());
        if x < first || x > last {
            return 0.0;
        }
        // index of the cell containing x
        let i = match self.nodes.binary_search_by(|n| n.partial_cmp(&x).unwrap()) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        match self.interp {
            Interpolation::PiecewiseConstant => {
                if i + 1 >= self.nodes.len() {
                    *self.values.last().unwrap()
                } else {
                    self.values[i]
                }
            }
            Interpolation::PiecewiseLinear => {
                if i + 1 >= self.nodes.len() {
                    *self.values.last().unwrap()
                } else {
                    let t = (x - self.nodes[i]) / (self.nodes[i + 1] - self.nodes[i]);
                    self.values[i] * (1.0 - t) + self.values[i + 1] * t
                }
            }
        }
    }

    /// Interior node positions strictly inside `(a, b)`, for integrator splits.
    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let mut out: Vec<f64> =
            self.nodes.iter().copied().filter(|&x| x > lo && x < hi).collect();
        if a > b {
            out.reverse();
        }
        out
    }

    /// Discrete growth-condition diagnostic: composite trapezoid of
    /// `(1 + |x|) |q(x)|` over the node range. Always finite on a grid.
    pub fn growth_functional(&self) -> f64 {
        if self.nodes.len() < 2 {
            return 0.0;
        }
        let g = |i: usize| (1.0 + self.nodes[i].abs()) * self.values[i].abs();
        let mut sum = 0.0;
        for i in 0..self.nodes.len() - 1 {
            let dx = self.nodes[i + 1] - self.nodes[i];
            sum += match self.interp {
                Interpolation::PiecewiseConstant => g(i) * dx,
                Interpolation::PiecewiseLinear => 0.5 * (g(i) + g(i + 1)) * dx,
            };
        }
        sum
    }

    /// Integral of the interpolant over the whole line.
    pub fn integral(&self) -> f64 {
        self.integral_complex(Complex64::new(0.0, 0.0), f64::NEG_INFINITY, f64::INFINITY).re
    }

    /// `int q(t) e^{i c t} dt` over `[lo, hi]`, exact for the interpolant.
    /// Handles complex `c`; cells are clipped to the range.
    pub fn oscillatory_integral(&self, c: Complex64, lo: f64, hi: f64) -> Complex64 {
        self.integral_complex(c, lo, hi)
    }

    fn integral_complex(&self, c: Complex64, lo: f64, hi: f64) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        if self.nodes.len() < 2 {
            return sum;
        }
        for i in 0..self.nodes.len() - 1 {
            let (mut a, mut b) = (self.nodes[i], self.nodes[i + 1]);
            if b <= lo || a >= hi {
                continue;
            }
            let (qa0, qb0) = match self.interp {
                Interpolation::PiecewiseConstant => (self.values[i], self.values[i]),
                Interpolation::PiecewiseLinear => (self.values[i], self.values[i + 1]),
            };
            // clip the cell, interpolating endpoint values
            let (mut qa, mut qb) = (qa0, qb0);
            if a < lo {
                let t = (lo - a) / (b - a);
                qa = qa0 + (qb0 - qa0) * t;
                a = lo;
            }
            if b > hi {
                let t = (hi - self.nodes[i]) / (self.nodes[i + 1] - self.nodes[i]);
                qb = qa0 + (qb0 - qa0) * t;
                b = hi;
            }
            sum += cell_oscillatory(qa, qb, a, b, c);
        }
        sum
    }

    /// Reads `x,q` CSV (header required, `#` comment lines skipped).
    pub fn from_csv_path(path: &Path, support: f64, interp: Interpolation) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        let mut saw_header = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                let head: Vec<&str> = line.split(',').map(str::trim).collect();
                if head != ["x", "q"] {
                    return Err(Error::Parse(format!(
                        "potential CSV must start with header 'x,q', got '{line}'"
                    )));
                }
                saw_header = true;
                continue;
            }
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| Error::Parse(format!("line {}: missing field", lineno + 1)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            nodes.push(parse(parts.next())?);
            values.push(parse(parts.next())?);
        }
        if !saw_header {
            return Err(Error::Parse("potential CSV is empty".into()));
        }
        Self::new(support, nodes, values, interp)
    }

    pub fn to_csv_path(&self, path: &Path, comment: Option<&str>) -> Result<()> {
        let mut out = String::new();
        if let Some(c) = comment {
            out.push_str(&format!("# {c}\n"));
        }
        out.push_str("x,q\n");
        for (x, v) in self.nodes.iter().zip(&self.values) {
            out.push_str(&format!("{x},{v}\n"));
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Exact `int_a^b (linear from qa to qb)(t) e^{i c t} dt`.
fn cell_oscillatory(qa: f64, qb: f64, a: f64, b: f64, c: Complex64) -> Complex64 {
    let mid = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mean = 0.5 * (qa + qb);
    let slope_h = 0.5 * (qb - qa); // slope * h
    let i = Complex64::i();
    let phase = (i * c * mid).exp();
    let z = c * h;
    // int_{-h}^{h} e^{i c s} ds = 2 h sinc(c h)
    // int_{-h}^{h} s e^{i c s} ds = 2 i h^2 (sin z - z cos z)/z^2
    let even = 2.0 * h * sinc(z);
    let odd = 2.0 * i * h * sin_minus_zcos_over_z2(z);
    phase * (mean * even + slope_h * odd)
}
