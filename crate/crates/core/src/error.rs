use thiserror::Error;

/// Errors produced by the scattering and reconstruction routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("transfer matrix must have det = 1, got det = {det:.16e}")]
    BadTransferMatrix { det: f64 },

    #[error("invalid potential grid: {0}")]
    BadPotential(String),

    #[error("invalid scattering data: {0}")]
    BadScatteringData(String),

    /// A caller violated a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The requested evaluation point lies outside the mathematical domain.
    #[error("domain violation: {0}")]
    Domain(String),

    #[error("integration failure: {0}")]
    Integration(String),

    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error(
        "classification inconclusive (tail fit residual {residual:.3e}); widen the frequency grid"
    )]
    Inconclusive { residual: f64 },

    #[error("fit did not converge: residual {residual:.3e}")]
    FitDiverged { residual: f64 },

    #[error("m-function pole near lambda = {nearest_zero:.12e} (|w2(S)| = {w2_abs:.3e})")]
    MFunctionPole { nearest_zero: f64, w2_abs: f64 },

    #[error("quadrature grid too sparse near xi = {at:.6}: error estimate {estimate:.3e}")]
    QuadratureRefinement { at: f64, estimate: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
