//! Resolved run configurations. Flags win over the optional config file;
//! the resolved struct is hashed (FNV-1a over its canonical JSON) and the
//! hash is embedded in every output file.

use serde::{Deserialize, Serialize};

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

pub fn config_hash<T: Serialize>(cfg: &T) -> String {
    let canonical = serde_json::to_string(cfg).expect("config serializes");
    format!("{:016x}", fnv1a64(canonical.as_bytes()))
}

/// Optional config file: any subset of the per-command sections.
#[derive(Debug, Default, Deserialize)]
pub struct ConfigFile {
    #[serde(default)]
    pub forward: ForwardSection,
    #[serde(default)]
    pub invert: InvertSection,
    #[serde(default)]
    pub recover: RecoverSection,
    #[serde(default)]
    pub validate: ValidateSection,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
pub struct ForwardSection {
    pub potential: Option<String>,
    pub matrix: Option<String>,
    pub support: Option<f64>,
    pub interpolation: Option<String>,
    pub xi_min: Option<f64>,
    pub xi_max: Option<f64>,
    pub n_xi: Option<usize>,
    pub eta_max: Option<f64>,
    pub tol: Option<f64>,
    pub log_floor: Option<f64>,
    pub out: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
pub struct InvertSection {
    pub data: Option<String>,
    pub out: Option<String>,
    pub xi_floor: Option<f64>,
    pub skip_traces: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
pub struct RecoverSection {
    pub data: Option<String>,
    pub matrix: Option<String>,
    pub support: Option<f64>,
    pub cells: Option<usize>,
    pub reg: Option<f64>,
    pub samples: Option<usize>,
    pub xi_fit_min: Option<f64>,
    pub xi_fit_max: Option<f64>,
    pub max_iterations: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<String>,
    pub misfit_out: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
pub struct ValidateSection {
    pub suite: Option<String>,
    pub matrix: Option<String>,
    pub potential: Option<String>,
    pub support: Option<f64>,
    pub interpolation: Option<String>,
    pub k_max: Option<u32>,
    pub tol: Option<f64>,
    pub report: Option<String>,
}

// Resolved configurations, serialized canonically for hashing and echoed
// into outputs.

#[derive(Debug, Clone, Serialize)]
pub struct ForwardConfig {
    pub command: &'static str,
    pub potential: String,
    pub matrix: String,
    pub support: f64,
    pub interpolation: String,
    pub xi_min: f64,
    pub xi_max: f64,
    pub n_xi: usize,
    pub eta_max: f64,
    pub tol: f64,
    pub log_floor: Option<f64>,
    pub out: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvertConfig {
    pub command: &'static str,
    pub data: String,
    pub out: String,
    pub xi_floor: f64,
    pub skip_traces: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecoverConfig {
    pub command: &'static str,
    pub data: String,
    pub matrix: String,
    pub support: f64,
    pub cells: usize,
    pub reg: f64,
    pub samples: usize,
    pub xi_fit_min: Option<f64>,
    pub xi_fit_max: Option<f64>,
    pub max_iterations: usize,
    pub tol: f64,
    pub out: String,
    pub misfit_out: Option<String>,
    pub reg_sweep: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidateConfig {
    pub command: &'static str,
    pub suite: String,
    pub matrix: String,
    pub potential: String,
    pub support: f64,
    pub interpolation: String,
    pub k_max: u32,
    pub tol: f64,
    pub report: String,
    pub seed: u64,
}
