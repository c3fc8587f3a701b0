use num_complex::Complex64;

use crate::error::{Error, Result};

/// Solution value `(y, y')` of `-y'' + q y = zeta^2 y` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub y: Complex64,
    pub yp: Complex64,
    /// Position the pair is evaluated at.
    pub x: f64,
    /// Spectral parameter; the equation uses `lambda = zeta^2`.
    pub zeta: Complex64,
}

impl StateVector {
    pub fn new(y: Complex64, yp: Complex64, x: f64, zeta: Complex64) -> Self {
        StateVector { y, yp, x, zeta }
    }

    pub fn is_finite(&self) -> bool {
        self.y.re.is_finite()
            && self.y.im.is_finite()
            && self.yp.re.is_finite()
            && self.yp.im.is_finite()
            && self.x.is_finite()
    }

    pub fn lambda(&self) -> Complex64 {
        self.zeta * self.zeta
    }
}

/// Wronskian `u y * v y' - v y * u y'` of two states at the same point and
/// spectral parameter.
pub fn wronskian(u: &StateVector, v: &StateVector) -> Result<Complex64> {
    let scale = 1.0 + u.x.abs().max(v.x.abs());
    if (u.x - v.x).abs() > 1e-12 * scale {
        return Err(Error::Contract(format!(
            "wronskian requires states at the same point, got x = {} and x = {}",
            u.x, v.x
        )));
    }
    if (u.zeta - v.zeta).norm() > 1e-12 * (1.0 + u.zeta.norm()) {
        return Err(Error::Contract(
            "wronskian requires states with the same spectral parameter".into(),
        ));
    }
    Ok(u.y * v.yp - v.y * u.yp)
}
