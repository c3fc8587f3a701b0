use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reflection-coefficient samples on a real frequency grid together with the
/// bound-state parameters `eta_1 < ... < eta_N` (eigenvalues `-eta_j^2`).
#[derive(Debug, Clone)]
pub struct ScatteringData {
    xi: Vec<f64>,
    r: Vec<Complex64>,
    etas: Vec<f64>,
}

impl ScatteringData {
    pub fn new(xi: Vec<f64>, r: Vec<Complex64>, etas: Vec<f64>) -> Result<Self> {
        if xi.len() != r.len() {
            return Err(Error::BadScatteringData(format!(
                "{} frequencies but {} reflection samples",
                xi.len(),
                r.len()
            )));
        }
        if xi.is_empty() {
            return Err(Error::BadScatteringData("empty frequency grid".into()));
        }
        for &x in &xi {
            if x == 0.0 || !x.is_finite() {
                return Err(Error::BadScatteringData(
                    "frequency grid must consist of finite nonzero values".into(),
                ));
            }
        }
        for (k, &v) in r.iter().enumerate() {
            if !(v.norm() < 1.0) {
                return Err(Error::BadScatteringData(format!(
                    "|R| must be < 1 at every sample; |R({})| = {}",
                    xi[k],
                    v.norm()
                )));
            }
        }
        for w in etas.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::BadScatteringData(
                    "bound-state parameters must be strictly increasing".into(),
                ));
            }
        }
        if etas.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::BadScatteringData(
                "bound-state parameters must be positive".into(),
            ));
        }
        Ok(ScatteringData { xi, r, etas })
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }
    pub fn reflection(&self) -> &[Complex64] {
        &self.r
    }
    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }
    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn max_abs_xi(&self) -> f64 {
        self.xi.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    /// Sample index of an exact (within 1e-12) grid match.
    pub fn index_of(&self, xi: f64) -> Option<usize> {
        self.xi.iter().position(|&x| (x - xi).abs() <= 1e-12 * (1.0 + x.abs()))
    }

    pub fn from_json_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let raw: ScatteringDataJson = serde_json::from_str(&text)?;
        raw.try_into()
    }

    pub fn to_json_path(&self, path: &Path, config_hash: Option<String>) -> Result<()> {
        let raw = ScatteringDataJson::from_data(self, config_hash);
        std::fs::write(path, serde_json::to_string_pretty(&raw)?)?;
        Ok(())
    }
}

/// Wire format: parallel arrays, reflection split into real and imaginary parts.
#[derive(Serialize, Deserialize)]
pub struct ScatteringDataJson {
    pub xi: Vec<f64>,
    #[serde(rename = "R_re")]
    pub r_re: Vec<f64>,
    #[serde(rename = "R_im")]
    pub r_im: Vec<f64>,
    pub etas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl ScatteringDataJson {
    pub fn from_data(d: &ScatteringData, config_hash: Option<String>) -> Self {
        ScatteringDataJson {
            xi: d.xi.clone(),
            r_re: d.r.iter().map(|v| v.re).collect(),
            r_im: d.r.iter().map(|v| v.im).collect(),
            etas: d.etas.clone(),
            config_hash,
        }
    }
}

impl TryFrom<ScatteringDataJson> for ScatteringData {
    type Error = Error;
    fn try_from(raw: ScatteringDataJson) -> Result<Self> {
        if raw.r_re.len() != raw.r_im.len() {
            return Err(Error::BadScatteringData(
                "R_re and R_im arrays have different lengths".into(),
            ));
        }
        let r = raw
            .r_re
            .iter()
            .zip(&raw.r_im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        ScatteringData::new(raw.xi, r, raw.etas)
    }
}

/// Sampled complex-valued function, used to carry traces of A, B, Delta and
/// friends between pipeline stages.
#[derive(Debug, Clone)]
pub struct ComplexFunctionTrace {
    abscissae: Vec<Complex64>,
    values: Vec<Complex64>,
    label: String,
}

impl ComplexFunctionTrace {
    pub fn new(
        abscissae: Vec<Complex64>,
        values: Vec<Complex64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if abscissae.len() != values.len() {
            return Err(Error::Contract(format!(
                "trace arrays must have equal length ({} vs {})",
                abscissae.len(),
                values.len()
            )));
        }
        Ok(ComplexFunctionTrace { abscissae, values, label: label.into() })
    }

    pub fn on_real_grid(xs: &[f64], values: Vec<Complex64>, label: impl Into<String>) -> Result<Self> {
        let abscissae = xs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(abscissae, values, label)
    }

    pub fn abscissae(&self) -> &[Complex64] {
        &self.abscissae
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
