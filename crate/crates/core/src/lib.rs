//! Resonances of the s-wave delta-shell potential.
//!
//! Second-sheet S-matrix poles are located with a Newton search checked by the
//! argument principle. Gamow states are built from them, and the survival
//! amplitude of a prepared state splits into exponentially decaying pole terms
//! plus a rotated-contour background. Units: hbar = 2m = 1.

pub mod effective_theory;
pub mod error;
pub mod gamow_states;
pub mod pole_finder;
pub mod quadrature;
pub mod scattering_model;
pub mod spectral_decomposition;

pub use error::{Error, Result};
pub use num_complex::Complex64;
