//! Scattering for the 1-D Schrödinger operator on the line with a point
//! transfer condition `(y, y')(0+) = M (y, y')(0-)` at the origin.
//!
//! The crate covers the forward problem (Jost solutions, scattering
//! coefficients A and B, reflection coefficient, bound states), the inverse
//! reconstruction of the transfer matrix and of A from reflection data, the
//! Titchmarsh-Weyl m-function machinery for compactly supported potentials
//! with constructive potential recovery by regularized fitting, and a
//! numerical validation suite for the large-parameter asymptotics.

pub mod asymptotics;
pub mod error;
pub mod fit;
pub mod forward;
pub mod inverse;
pub mod ode;
pub mod potential;
pub mod scattering;
pub mod special;
pub mod state;
pub mod transfer;
pub mod weyl;

pub use error::{Error, Result};
pub use ode::OdeOptions;
pub use potential::{Interpolation, PotentialGrid};
pub use scattering::{ComplexFunctionTrace, ScatteringData};
pub use state::StateVector;
pub use transfer::TransferMatrix;
