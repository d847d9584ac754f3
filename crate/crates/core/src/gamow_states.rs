//! Gamow states built from resonance poles.
//!
//! A decaying Gamow state with complex energy `z = E_R - i Gamma/2` has the
//! energy wavefunction
//!
//! ```text
//! psi(E) = i sqrt(Gamma / 2 pi) / (E - z),     -inf < E < inf
//! ```
//!
//! and evolves by the phase `e^{-i z t}`, which is only admitted for `t >= 0`.
//! The growing partner at `conj(z)` is only admitted for `t <= 0`. Asking for
//! the other half-line is an error, never a value.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pole_finder::ResonancePole;
use crate::quadrature::{exp_scaled_e1, integrate, panel_points, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GamowKind {
    /// `z = E_R - i Gamma/2`, evolution for `t >= 0`.
    Decaying,
    /// `z = E_R + i Gamma/2`, evolution for `t <= 0`.
    Growing,
}

impl GamowKind {
    pub fn name(self) -> &'static str {
        match self {
            GamowKind::Decaying => "decaying",
            GamowKind::Growing => "growing",
        }
    }

    pub fn admits(self, t: f64) -> bool {
        match self {
            GamowKind::Decaying => t >= 0.0,
            GamowKind::Growing => t <= 0.0,
        }
    }

    /// Fails with [`Error::SemigroupDomain`] outside the admissible half-line.
    pub fn check_time(self, t: f64) -> Result<()> {
        if t.is_nan() {
            return Err(Error::Domain("time is NaN".into()));
        }
        if self.admits(t) {
            Ok(())
        } else {
            Err(Error::SemigroupDomain {
                t,
                kind: self.name(),
            })
        }
    }
}

impl fmt::Display for GamowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GamowState {
    resonance_energy: f64,
    width: f64,
    kind: GamowKind,
    pole: Option<ResonancePole>,
}

impl GamowState {
    pub fn new(resonance_energy: f64, width: f64, kind: GamowKind) -> Result<Self> {
        if !resonance_energy.is_finite() || !(width.is_finite() && width > 0.0) {
            return Err(Error::Domain(format!(
                "need finite E_R and Gamma > 0, got E_R = {resonance_energy}, Gamma = {width}"
            )));
        }
        Ok(Self {
            resonance_energy,
            width,
            kind,
            pole: None,
        })
    }

    pub fn from_pole(pole: &ResonancePole) -> Self {
        Self {
            resonance_energy: pole.resonance_energy(),
            width: pole.width(),
            kind: pole.kind(),
            pole: Some(*pole),
        }
    }

    pub fn resonance_energy(&self) -> f64 {
        self.resonance_energy
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn kind(&self) -> GamowKind {
        self.kind
    }

    pub fn pole(&self) -> Option<&ResonancePole> {
        self.pole.as_ref()
    }

    pub fn lifetime(&self) -> f64 {
        crate::scattering_model::lifetime(self.width)
    }

    pub fn complex_energy(&self) -> Complex64 {
        match self.kind {
            GamowKind::Decaying => Complex64::new(self.resonance_energy, -0.5 * self.width),
            GamowKind::Growing => Complex64::new(self.resonance_energy, 0.5 * self.width),
        }
    }

    pub fn partner(&self) -> Self {
        Self {
            kind: match self.kind {
                GamowKind::Decaying => GamowKind::Growing,
                GamowKind::Growing => GamowKind::Decaying,
            },
            pole: self.pole.map(|p| p.partner()),
            ..*self
        }
    }

    fn require_decaying(&self) -> Result<()> {
        match self.kind {
            GamowKind::Decaying => Ok(()),
            GamowKind::Growing => Err(Error::Domain(
                "operation is defined for the decaying Gamow state only".into(),
            )),
        }
    }

    fn lorentzian(&self, e: f64) -> f64 {
        let half = 0.5 * self.width;
        let x = e - self.resonance_energy;
        self.width / (2.0 * PI) / (x * x + half * half)
    }
}

/// Idealized Breit-Wigner energy wavefunction of a decaying Gamow state.
pub fn bw_amplitude(g: &GamowState, e: Complex64) -> Result<Complex64> {
    g.require_decaying()?;
    let z = g.complex_energy();
    let d = e - z;
    if d.norm() == 0.0 {
        return Err(Error::Pole {
            k: crate::scattering_model::momentum(z),
        });
    }
    let prefactor = Complex64::new(0.0, (g.width / (2.0 * PI)).sqrt());
    Ok(prefactor / d)
}

/// `e^{-i z t}`: `e^{-i E_R t} e^{-Gamma t/2}` for decaying states (`t >= 0`),
/// `e^{-i E_R t} e^{+Gamma t/2}` for growing ones (`t <= 0`).
pub fn semigroup_phase(g: &GamowState, t: f64) -> Result<Complex64> {
    g.kind.check_time(t)?;
    Ok((Complex64::new(0.0, -t) * g.complex_energy()).exp())
}

/// Rational test function `N / prod (E - w_j)^{p_j}`.
///
/// [`HardyTestFunction::new`] only accepts poles in the upper half-plane, so
/// the function is analytic in the closed lower half-plane.
/// [`HardyTestFunction::counterexample`] lifts that restriction.
#[derive(Debug, Clone, PartialEq)]
pub struct HardyTestFunction {
    normalization: Complex64,
    poles: Vec<(Complex64, u32)>,
}

impl HardyTestFunction {
    pub fn new(normalization: Complex64, poles: Vec<(Complex64, u32)>) -> Result<Self> {
        if let Some((w, _)) = poles.iter().find(|(w, _)| !(w.im > 0.0)) {
            return Err(Error::Domain(format!(
                "Hardy test function pole must satisfy Im w > 0, got {w}"
            )));
        }
        Self::counterexample(normalization, poles)
    }

    /// Same family without the half-plane restriction (poles must still be
    /// off the real axis).
    pub fn counterexample(normalization: Complex64, poles: Vec<(Complex64, u32)>) -> Result<Self> {
        if poles.is_empty() {
            return Err(Error::Domain(
                "test function needs at least one pole".into(),
            ));
        }
        for &(w, p) in &poles {
            if p == 0 || w.im == 0.0 || !w.re.is_finite() || !w.im.is_finite() {
                return Err(Error::Domain(format!(
                    "invalid test-function pole {w} of order {p}"
                )));
            }
        }
        if normalization.norm() == 0.0 {
            return Err(Error::Domain("normalization must be non-zero".into()));
        }
        Ok(Self {
            normalization,
            poles,
        })
    }

    pub fn is_hardy(&self) -> bool {
        self.poles.iter().all(|(w, _)| w.im > 0.0)
    }

    pub fn total_power(&self) -> u32 {
        self.poles.iter().map(|(_, p)| p).sum()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            normalization: self.normalization * factor,
            poles: self.poles.clone(),
        }
    }

    pub fn poles(&self) -> &[(Complex64, u32)] {
        &self.poles
    }

    pub fn eval(&self, e: Complex64) -> Complex64 {
        self.poles
            .iter()
            .fold(self.normalization, |acc, &(w, p)| acc / (e - w).powu(p))
    }
}

// Integral over the real line via E = center + scale tan(u).
fn integrate_real_line<F: FnMut(f64) -> Complex64>(
    mut f: F,
    center: f64,
    scale: f64,
    features: &[f64],
    opts: &QuadOptions,
) -> Result<Complex64> {
    let half_pi = 0.5 * PI;
    let mapped: Vec<f64> = features
        .iter()
        .map(|&e| ((e - center) / scale).atan())
        .collect();
    let points = panel_points(-half_pi, half_pi, PI / 64.0, &mapped);
    let r = integrate(
        |u| {
            let tn = u.tan();
            f(center + scale * tn) * (scale * (1.0 + tn * tn))
        },
        &points,
        opts,
    )?;
    Ok(r.value)
}

/// Relative defect `|A - z B| / |z B|` of the weak eigenvalue relation, where
/// `B = int psi(E) bw(E) dE` and `A = int psi(E) E bw(E) dE` over the real line.
///
/// The pairing is bilinear: `psi` enters without conjugation, as the boundary
/// value of a function analytic in the lower half-plane. For Hardy-class `psi`
/// the defect vanishes; a pole of `psi` in the lower half-plane breaks it.
pub fn eigenvalue_pairing_residual(g: &GamowState, psi: &HardyTestFunction) -> Result<f64> {
    g.require_decaying()?;
    if psi.total_power() < 2 {
        return Err(Error::Quadrature {
            reason: "pairing integrals diverge for test functions decaying slower than 1/E^2"
                .into(),
            value: Complex64::new(f64::NAN, f64::NAN),
            error: f64::INFINITY,
        });
    }
    let z = g.complex_energy();
    let center = g.resonance_energy;
    let mut widths = vec![0.5 * g.width];
    let mut features = vec![center];
    for &(w, _) in psi.poles() {
        features.push(w.re);
        widths.push(w.im.abs());
    }
    let scale = widths
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
        .max(1e-3 * (1.0 + center.abs()));
    let features: Vec<f64> = features
        .iter()
        .flat_map(|&e| widths.iter().flat_map(move |&w| [e - w, e, e + w]))
        .collect();

    let integrand = |e: f64, with_energy: bool| -> Complex64 {
        let ec = Complex64::new(e, 0.0);
        let bw = bw_amplitude(g, ec).unwrap_or(Complex64::new(0.0, 0.0));
        let v = psi.eval(ec) * bw;
        if with_energy {
            v * e
        } else {
            v
        }
    };

    let rough = QuadOptions::new(0.0, 1e-6);
    let magnitude = integrate_real_line(
        |e| Complex64::new(integrand(e, true).norm() + integrand(e, false).norm(), 0.0),
        center,
        scale,
        &features,
        &rough,
    )?
    .re;
    let opts = QuadOptions::new(1e-13 * magnitude, 1e-12);
    let a = integrate_real_line(|e| integrand(e, true), center, scale, &features, &opts)?;
    let b = integrate_real_line(|e| integrand(e, false), center, scale, &features, &opts)?;

    let zb = z * b;
    if zb.norm() <= 1e-12 * magnitude {
        return Err(Error::Quadrature {
            reason: "pairing with the Gamow functional vanishes identically".into(),
            value: b,
            error: magnitude * 1e-13,
        });
    }
    Ok((a - zb).norm() / zb.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerCutoff {
    /// Energies over the whole extended axis `(-inf, inf)`.
    Extended,
    /// The physical spectrum `[0, inf)` only.
    Physical,
}

/// `e^{-i w t} E1(i t (U - w))` written as `e^{-i U t} [e^x E1(x)]` so that
/// neither factor overflows for large `t`.
fn exp_tail(w: Complex64, upper: f64, t: f64) -> Complex64 {
    let x = Complex64::new(0.0, t) * (upper - w);
    Complex64::new(0.0, -upper * t).exp() * exp_scaled_e1(x)
}

/// `int_U^inf e^{-iEt} / (E - w) dE` for real `t != 0`.
fn upper_tail(w: Complex64, upper: f64, t: f64) -> Complex64 {
    exp_tail(w, upper, t)
}

/// `int_{-inf}^L e^{-iEt} / (E - w) dE` for real `t != 0`.
fn lower_tail(w: Complex64, lower: f64, t: f64) -> Complex64 {
    -exp_tail(w, lower, t)
}

fn window(g: &GamowState, cutoff: LowerCutoff) -> (f64, f64) {
    let half = 60.0 * g.width + 10.0;
    match cutoff {
        LowerCutoff::Extended => (g.resonance_energy - half, g.resonance_energy + half),
        LowerCutoff::Physical => (0.0, g.resonance_energy.max(0.0) + half),
    }
}

fn oscillation_panels(lo: f64, hi: f64, t: f64, g: &GamowState) -> Vec<f64> {
    let mut width = 2.0 * g.width;
    if t != 0.0 {
        width = width.min(PI / t.abs());
    }
    let e = g.resonance_energy;
    let w = g.width;
    panel_points(lo, hi, width, &[e - w, e, e + w])
}

/// Survival amplitude of the Breit-Wigner density,
/// `a(t) = int |psi(E)|^2 e^{-iEt} dE` over the extended axis or over `E >= 0`.
///
/// The finite window is integrated adaptively; both tails are closed
/// analytically through the exponential integral.
pub fn bw_survival(g: &GamowState, t: f64, cutoff: LowerCutoff) -> Result<Complex64> {
    g.require_decaying()?;
    g.kind.check_time(t)?;
    let (lo, hi) = window(g, cutoff);
    let points = oscillation_panels(lo, hi, t, g);
    let opts = QuadOptions::new(1e-14, 1e-13);
    let body = integrate(
        |e| g.lorentzian(e) * Complex64::new(0.0, -e * t).exp(),
        &points,
        &opts,
    )?
    .value;

    let z = g.complex_energy();
    let half = 0.5 * g.width;
    let er = g.resonance_energy;
    // |psi|^2 = (i / 2 pi) [1/(E - z) - 1/(E - conj z)]
    let coeff = Complex64::new(0.0, 1.0 / (2.0 * PI));
    let upper = if t == 0.0 {
        Complex64::new((0.5 * PI - ((hi - er) / half).atan()) / PI, 0.0)
    } else {
        coeff * (upper_tail(z, hi, t) - upper_tail(z.conj(), hi, t))
    };
    let lower = match cutoff {
        LowerCutoff::Physical => Complex64::new(0.0, 0.0),
        LowerCutoff::Extended if t == 0.0 => {
            Complex64::new((((lo - er) / half).atan() + 0.5 * PI) / PI, 0.0)
        }
        LowerCutoff::Extended => coeff * (lower_tail(z, lo, t) - lower_tail(z.conj(), lo, t)),
    };
    Ok(body + upper + lower)
}

/// Normalised Fourier transform of the Gamow wavefunction itself,
/// `(1 / sqrt(2 pi Gamma)) int psi(E) e^{-iEt} dE`, for any real `t`.
///
/// Closing the contour gives `e^{-izt}` for `t > 0`, `1/2` at `t = 0`
/// (principal value) and exactly `0` for `t < 0`. This is a diagnostic; the
/// semigroup itself stays restricted to `t >= 0`.
pub fn bw_fourier_diagnostic(g: &GamowState, t: f64) -> Result<Complex64> {
    g.require_decaying()?;
    if !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite, got {t}")));
    }
    let z = g.complex_energy();
    let (lo, hi) = window(g, LowerCutoff::Extended);
    let points = oscillation_panels(lo, hi, t, g);
    let opts = QuadOptions::new(1e-12, 1e-13);
    let body = integrate(
        |e| Complex64::new(0.0, -e * t).exp() / (e - z),
        &points,
        &opts,
    )?
    .value;
    let tails = if t == 0.0 {
        (lo - z).ln() - (hi - z).ln() - Complex64::new(0.0, PI)
    } else {
        upper_tail(z, hi, t) + lower_tail(z, lo, t)
    };
    Ok(Complex64::new(0.0, 1.0 / (2.0 * PI)) * (body + tails))
}
