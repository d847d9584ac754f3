use num_complex::Complex64;
use thiserror::Error;

/// Every failure mode of the numerical modules.
///
/// The variant name is part of the public contract: the command-line runner
/// reports it verbatim, so renaming a variant is a breaking change.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite or out-of-domain input: {0}")]
    Domain(String),

    #[error("evaluation at an S-matrix pole (k = {k})")]
    Pole { k: Complex64 },

    #[error("ODE oracle did not converge under step refinement (difference {difference:e})")]
    Oracle { difference: f64 },

    #[error(
        "Newton iteration did not converge after {iterations} steps (last |F| = {residual:e})"
    )]
    Convergence { iterations: usize, residual: f64 },

    #[error("zero at k = {k} is not a resonance ({reason})")]
    NotAResonance { k: Complex64, reason: &'static str },

    #[error("a zero lies on or near the contour (|F/F'| = {distance:e} at k = {k})")]
    Boundary { k: Complex64, distance: f64 },

    #[error("quadrature failed: {reason} (estimate {value}, error {error:e})")]
    Quadrature {
        reason: String,
        value: Complex64,
        error: f64,
    },

    #[error("pole scan found {found} zeros but the winding number is {expected}")]
    IncompleteScan { found: usize, expected: i64 },

    #[error("semigroup evolution is not defined at t = {t} for a {kind} state")]
    SemigroupDomain { t: f64, kind: &'static str },

    #[error("pole at k = {k} is degenerate (|F'| = {derivative:e})")]
    DegeneratePole { k: Complex64, derivative: f64 },

    #[error("contour passes within {distance:e} of a singularity at k = {k}")]
    Contour { k: Complex64, distance: f64 },

    #[error("reconstruction mismatch: poles + background = {reconstructed}, direct = {direct}")]
    Decomposition {
        reconstructed: Complex64,
        direct: Complex64,
    },
}

impl Error {
    /// Stable machine-readable name of the failure class.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DomainError",
            Error::Pole { .. } => "PoleError",
            Error::Oracle { .. } => "OracleError",
            Error::Convergence { .. } => "ConvergenceError",
            Error::NotAResonance { .. } => "NotAResonance",
            Error::Boundary { .. } => "BoundaryError",
            Error::Quadrature { .. } => "QuadratureError",
            Error::IncompleteScan { .. } => "IncompleteScanError",
            Error::SemigroupDomain { .. } => "SemigroupDomainError",
            Error::DegeneratePole { .. } => "DegeneratePoleError",
            Error::Contour { .. } => "ContourError",
            Error::Decomposition { .. } => "DecompositionError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
