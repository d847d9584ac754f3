//! Finite-level evolution with a diagonal complex Hamiltonian.
//!
//! Keeping only the Gamow terms of a decomposition leaves `N` levels with
//! complex energies `z_i` that evolve as `c_i(t) = c_i e^{-i z_i t}`. For
//! `N = 2` this is the two-level model of neutral-kaon type, whose intensity
//! beats at the difference of the level energies.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gamow_states::GamowKind;
use crate::pole_finder::ResonancePole;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub energy: Complex64,
    pub coefficient: Complex64,
    pub label: Option<String>,
}

impl Level {
    pub fn width(&self) -> f64 {
        2.0 * self.energy.im.abs()
    }
}

/// Levels share one kind. Decaying levels have `Im z < 0` and evolve
/// forward, growing levels have `Im z > 0` and evolve backward.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveModel {
    levels: Vec<Level>,
    kind: GamowKind,
}

impl EffectiveModel {
    pub fn new(levels: Vec<Level>) -> Result<Self> {
        Self::with_kind(levels, GamowKind::Decaying)
    }

    pub fn with_kind(levels: Vec<Level>, kind: GamowKind) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Domain(
                "an effective model needs at least one level".into(),
            ));
        }
        for l in &levels {
            let ok = match kind {
                GamowKind::Decaying => l.energy.im < 0.0,
                GamowKind::Growing => l.energy.im > 0.0,
            };
            if !ok || !l.energy.re.is_finite() || !l.energy.im.is_finite() {
                return Err(Error::Domain(format!(
                    "level energy {} is not admissible for a {kind} model",
                    l.energy
                )));
            }
            if !(l.coefficient.re.is_finite() && l.coefficient.im.is_finite()) {
                return Err(Error::Domain(format!(
                    "level coefficient {} is not finite",
                    l.coefficient
                )));
            }
        }
        Ok(Self { levels, kind })
    }

    /// Levels from decaying poles and their coefficients, labelled by index.
    pub fn from_poles(poles: &[(ResonancePole, Complex64)]) -> Result<Self> {
        let levels = poles
            .iter()
            .enumerate()
            .map(|(i, (p, c))| Level {
                energy: p.energy(),
                coefficient: *c,
                label: Some(format!("pole{i}")),
            })
            .collect();
        Self::new(levels)
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn kind(&self) -> GamowKind {
        self.kind
    }

    /// The model with the coefficients replaced by their evolved values.
    pub fn evolved(&self, t: f64) -> Result<Self> {
        let coefficients = evolve_effective(self, t)?;
        let levels = self
            .levels
            .iter()
            .zip(coefficients)
            .map(|(l, c)| Level {
                coefficient: c,
                ..l.clone()
            })
            .collect();
        Ok(Self {
            levels,
            kind: self.kind,
        })
    }
}

/// `c_i(t) = c_i e^{-i z_i t}` on the admissible half-line only.
pub fn evolve_effective(m: &EffectiveModel, t: f64) -> Result<Vec<Complex64>> {
    m.kind.check_time(t)?;
    Ok(m.levels
        .iter()
        .map(|l| l.coefficient * (-I * l.energy * t).exp())
        .collect())
}

/// `|sum_i c_i(t)|^2`.
pub fn intensity(m: &EffectiveModel, t: f64) -> Result<f64> {
    Ok(evolve_effective(m, t)?
        .into_iter()
        .sum::<Complex64>()
        .norm_sqr())
}
