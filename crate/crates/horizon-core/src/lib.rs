//! Entanglement entropy of the regularized negative-frequency Dirac projection
//! on intervals near the Schwarzschild horizon, mode by mode.

pub mod angular;
pub mod entropy;
pub mod frequency;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod ode;
pub mod opalpha;
pub mod quadrature;
pub mod radial;
pub mod spectral;
pub mod studies;

pub use error::{Error, Result};
