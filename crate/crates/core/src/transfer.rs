use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::StateVector;

/// Real 2x2 matrix coupling the solution across the origin:
/// `(y, y')(0+) = M (y, y')(0-)`. Self-adjointness requires `det M = 1`,
/// which construction enforces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixEntries", into = "MatrixEntries")]
pub struct TransferMatrix {
    m11: f64,
    m12: f64,
    m21: f64,
    m22: f64,
}

#[derive(Serialize, Deserialize)]
struct MatrixEntries {
    m11: f64,
    m12: f64,
    m21: f64,
    m22: f64,
}

impl TryFrom<MatrixEntries> for TransferMatrix {
    type Error = Error;
    fn try_from(e: MatrixEntries) -> Result<Self> {
        TransferMatrix::new(e.m11, e.m12, e.m21, e.m22)
    }
}

impl From<TransferMatrix> for MatrixEntries {
    fn from(m: TransferMatrix) -> Self {
        MatrixEntries { m11: m.m11, m12: m.m12, m21: m.m21, m22: m.m22 }
    }
}

impl TransferMatrix {
    pub const DET_TOL: f64 = 1e-12;

    pub fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Result<Self> {
        let det = m11 * m22 - m12 * m21;
        if !det.is_finite() || (det - 1.0).abs() > Self::DET_TOL {
            return Err(Error::BadTransferMatrix { det });
        }
        Ok(TransferMatrix { m11, m12, m21, m22 })
    }

    pub fn identity() -> Self {
        TransferMatrix { m11: 1.0, m12: 0.0, m21: 0.0, m22: 1.0 }
    }

    pub fn diagonal(m11: f64) -> Result<Self> {
        if m11 == 0.0 {
            return Err(Error::BadTransferMatrix { det: 0.0 });
        }
        TransferMatrix::new(m11, 0.0, 0.0, 1.0 / m11)
    }

    pub fn m11(&self) -> f64 {
        self.m11
    }
    pub fn m12(&self) -> f64 {
        self.m12
    }
    pub fn m21(&self) -> f64 {
        self.m21
    }
    pub fn m22(&self) -> f64 {
        self.m22
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    /// Inverse; with det = 1 this is `[[m22, -m12], [-m21, m11]]`.
    pub fn inverse(&self) -> TransferMatrix {
        TransferMatrix { m11: self.m22, m12: -self.m12, m21: -self.m21, m22: self.m11 }
    }

    /// Maps a state at `0-` to the state at `0+`.
    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        self.check_at_origin(s)?;
        Ok(StateVector::new(
            self.m11 * s.y + self.m12 * s.yp,
            self.m21 * s.y + self.m22 * s.yp,
            s.x,
            s.zeta,
        ))
    }

    /// Maps a state at `0+` back to the state at `0-`.
    pub fn apply_inverse(&self, s: &StateVector) -> Result<StateVector> {
        self.check_at_origin(s)?;
        self.inverse().apply(s)
    }

    fn check_at_origin(&self, s: &StateVector) -> Result<()> {
        if s.x.abs() > 1e-12 {
            return Err(Error::Contract(format!(
                "transfer condition applies at x = 0, state is at x = {}",
                s.x
            )));
        }
        Ok(())
    }

    pub fn from_json_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        // parse the raw entries first so that a determinant violation is
        // reported as a domain error rather than a parse error
        let raw: MatrixEntries = serde_json::from_str(&text)?;
        raw.try_into()
    }

    pub fn to_json_path(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }
}
