//! Survival amplitude of a prepared state, computed two ways.
//!
//! The prepared state has energy wavefunction `phi(E) = N(E) / F(sqrt E)` with
//! a rational numerator `N` whose poles lie in the upper half of the energy
//! plane. The survival amplitude is
//!
//! ```text
//! A(t) = int_0^inf |phi(E)|^2 e^{-iEt} dE = int_0^inf g(k) dk,
//! g(k) = 2k N(k^2) N#(k^2) / (F(k) F(-k)) e^{-i k^2 t},
//! ```
//!
//! where `N#(E) = conj(N(conj E))`. On the real axis `g` reproduces the
//! spectral density and off it `g` is the analytic continuation. Rotating the
//! half-line `[0, R]` onto the ray `k = kappa e^{-i theta}` and closing with an
//! arc of radius `R` sweeps the Jost zeros of the sector, and
//!
//! ```text
//! A(t) = sum_i c_i e^{-i z_i t} + background(t),    c_i = -2 pi i h(k_i) / F'(k_i),
//! ```
//!
//! with `h = 2k N N# / F(-k)`. The background is everything else: the ray,
//! the arc, the real axis beyond `R^2` and the residues of any singularity of
//! `N#` swept by the rotation. Nothing is dropped, so the identity is exact up
//! to quadrature error.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gamow_states::GamowKind;
use crate::pole_finder::{count_zeros_in_sector, ResonancePole, SearchRegion};
use crate::quadrature::{integrate, integrate_semi_infinite, panel_points, QuadOptions};
use crate::scattering_model::{jost_derivative, jost_function, DeltaShellModel};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Minimum distance in `k` between the contour and any singularity.
pub const AVOIDANCE_MARGIN: f64 = 1e-3;

const CIRCLE_NODES: usize = 256;
const MAX_CUTOFF_ENERGY: f64 = 1e6;
const MAX_OSCILLATORY_PANELS: f64 = 400_000.0;

/// `N(E) = scale * prod (E - zero) / prod (E - pole)^power`.
///
/// Poles sit strictly in the upper half-plane; zeros may be anywhere. The
/// numerator must decay at least like `1/E^2` so that the spectral tail beyond
/// a finite cutoff is negligible.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalNumerator {
    scale: Complex64,
    zeros: Vec<Complex64>,
    poles: Vec<(Complex64, u32)>,
}

impl RationalNumerator {
    pub fn new(
        scale: Complex64,
        zeros: Vec<Complex64>,
        poles: Vec<(Complex64, u32)>,
    ) -> Result<Self> {
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !finite(&scale) || scale == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain(format!(
                "numerator scale must be finite and nonzero, got {scale}"
            )));
        }
        if let Some(z) = zeros.iter().find(|z| !finite(z)) {
            return Err(Error::Domain(format!("numerator zero {z} is not finite")));
        }
        for &(w, p) in &poles {
            if !finite(&w) || w.im <= 0.0 {
                return Err(Error::Domain(format!(
                    "numerator pole {w} must lie in the upper half-plane"
                )));
            }
            if p == 0 {
                return Err(Error::Domain(format!("numerator pole {w} has zero power")));
            }
        }
        let n = Self {
            scale,
            zeros,
            poles,
        };
        if n.decay_order() < 2 {
            return Err(Error::Domain(format!(
                "numerator must decay at least like 1/E^2, got order {}",
                n.decay_order()
            )));
        }
        Ok(n)
    }

    /// Total pole power minus the number of zeros.
    pub fn decay_order(&self) -> i64 {
        self.poles.iter().map(|&(_, p)| i64::from(p)).sum::<i64>() - self.zeros.len() as i64
    }

    pub fn scale(&self) -> Complex64 {
        self.scale
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn poles(&self) -> &[(Complex64, u32)] {
        &self.poles
    }

    pub fn eval(&self, e: Complex64) -> Complex64 {
        let mut v = self.scale;
        for &z in &self.zeros {
            v *= e - z;
        }
        for &(w, p) in &self.poles {
            v /= (e - w).powu(p);
        }
        v
    }

    /// `conj(N(conj E))`, which equals `conj N(E)` for real `E`.
    pub fn reflected(&self, e: Complex64) -> Complex64 {
        self.eval(e.conj()).conj()
    }

    fn rescaled(&self, factor: f64) -> Self {
        Self {
            scale: self.scale * factor,
            ..self.clone()
        }
    }
}

/// A normalized state `phi(E) = N(E) / F(sqrt E)` of the delta-shell model.
#[derive(Debug, Clone)]
pub struct PreparedState {
    model: DeltaShellModel,
    numerator: RationalNumerator,
    split_energy: f64,
    cutoff_energy: f64,
    opts: QuadOptions,
}

impl PreparedState {
    /// Normalizes `numerator` so that `int_0^inf |phi|^2 dE = 1`.
    pub fn new(model: DeltaShellModel, numerator: RationalNumerator) -> Result<Self> {
        Self::with_tolerance(model, numerator, 1e-12)
    }

    /// As [`PreparedState::new`], with `quad_tol` as the absolute target of
    /// every spectral integral.
    pub fn with_tolerance(
        model: DeltaShellModel,
        numerator: RationalNumerator,
        quad_tol: f64,
    ) -> Result<Self> {
        if !(quad_tol > 0.0 && quad_tol.is_finite()) {
            return Err(Error::Domain(format!(
                "quadrature tolerance must be positive, got {quad_tol}"
            )));
        }
        let reach = numerator
            .poles
            .iter()
            .map(|&(w, _)| w.norm())
            .chain(numerator.zeros.iter().map(|z| z.norm()))
            .fold(0.0f64, f64::max);
        let mut state = Self {
            model,
            numerator,
            split_energy: (4.0 * reach).max(64.0),
            cutoff_energy: 0.0,
            opts: QuadOptions::new(quad_tol, 1e-12),
        };
        let norm = state.tail_weight(0.0)?;
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Domain(format!(
                "state is not normalizable (norm {norm})"
            )));
        }
        state.numerator = state.numerator.rescaled(norm.sqrt().recip());

        let mut cutoff = state.split_energy;
        while state.tail_weight(cutoff)? > 0.1 * quad_tol {
            cutoff *= 2.0;
            if cutoff > MAX_CUTOFF_ENERGY {
                return Err(Error::Quadrature {
                    reason: "spectral density decays too slowly for a finite cutoff".into(),
                    value: Complex64::new(state.tail_weight(cutoff)?, 0.0),
                    error: quad_tol,
                });
            }
        }
        state.cutoff_energy = cutoff;
        Ok(state)
    }

    pub fn model(&self) -> &DeltaShellModel {
        &self.model
    }

    /// The numerator after normalization.
    pub fn numerator(&self) -> &RationalNumerator {
        &self.numerator
    }

    /// Energy beyond which the spectral weight is below a tenth of the
    /// quadrature tolerance; real-axis integrals stop there.
    pub fn cutoff_energy(&self) -> f64 {
        self.cutoff_energy
    }

    /// `phi(E)` for `E >= 0`.
    pub fn energy_wavefunction(&self, e: f64) -> Result<Complex64> {
        if !(e >= 0.0 && e.is_finite()) {
            return Err(Error::Domain(format!(
                "energy must be finite and non-negative, got {e}"
            )));
        }
        let k = Complex64::new(e.sqrt(), 0.0);
        Ok(self.numerator.eval(k * k) / jost_function(&self.model, k)?)
    }

    /// `|phi(E)|^2`.
    pub fn spectral_density(&self, e: f64) -> Result<f64> {
        Ok(self.energy_wavefunction(e)?.norm_sqr())
    }

    /// `phi(k) = N(k^2) / F(k)` anywhere in the momentum plane.
    pub fn momentum_wavefunction(&self, k: Complex64) -> Result<Complex64> {
        Ok(self.numerator.eval(k * k) / jost_function(&self.model, k)?)
    }

    /// `2k N(k^2) N#(k^2) / F(-k)`: the continued density times `F(k)`.
    fn residue_numerator(&self, k: Complex64) -> Result<Complex64> {
        let e = k * k;
        Ok(
            2.0 * k * self.numerator.eval(e) * self.numerator.reflected(e)
                / jost_function(&self.model, -k)?,
        )
    }

    /// Analytic continuation of `2k |phi(k)|^2` off the positive real axis.
    pub fn continued_density(&self, k: Complex64) -> Result<Complex64> {
        Ok(self.residue_numerator(k)? / jost_function(&self.model, k)?)
    }

    /// Singularities of the reflected numerator in the fourth quadrant of `k`
    /// (`k = +sqrt(conj w)`), with their order.
    pub fn reflected_singularities(&self) -> Vec<(Complex64, u32)> {
        self.numerator
            .poles
            .iter()
            .map(|&(w, p)| (w.conj().sqrt(), p))
            .collect()
    }

    fn density_at(&self, e: f64, failure: &mut Option<Error>) -> f64 {
        match self.spectral_density(e) {
            Ok(v) => v,
            Err(err) => {
                failure.get_or_insert(err);
                0.0
            }
        }
    }

    // int_from^inf |phi|^2 dE without oscillation.
    fn tail_weight(&self, from: f64) -> Result<f64> {
        let mut failure = None;
        let mut total = 0.0;
        if from < self.split_energy {
            let features = self.features();
            let points = panel_points(from, self.split_energy, 0.25, &features);
            let r = integrate(
                |e| Complex64::new(self.density_at(e, &mut failure), 0.0),
                &points,
                &self.opts,
            );
            total += r?.value.re;
        }
        let start = from.max(self.split_energy);
        let r = integrate_semi_infinite(
            |e| Complex64::new(self.density_at(e, &mut failure), 0.0),
            start,
            start,
            32,
            &self.opts,
        );
        total += r?.value.re;
        match failure {
            Some(e) => Err(e),
            None => Ok(total),
        }
    }

    fn features(&self) -> Vec<f64> {
        self.numerator.poles.iter().map(|&(w, _)| w.re).collect()
    }

    // int_from^cutoff |phi|^2 e^{-iEt} dE.
    fn oscillatory_segment(&self, from: f64, t: f64) -> Result<Complex64> {
        let to = self.cutoff_energy;
        if from >= to {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let width = if t > 0.0 { (PI / t).min(0.25) } else { 0.25 };
        if (to - from) / width > MAX_OSCILLATORY_PANELS {
            return Err(Error::Quadrature {
                reason: format!("oscillatory integral at t = {t} needs too many panels"),
                value: Complex64::new(0.0, 0.0),
                error: f64::INFINITY,
            });
        }
        let points = panel_points(from, to, width, &self.features());
        let mut failure = None;
        let r = integrate(
            |e| self.density_at(e, &mut failure) * Complex64::new(0.0, -e * t).exp(),
            &points,
            &self.opts,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(r?.value)
    }
}

/// `A(t) = int_0^inf |phi(E)|^2 e^{-iEt} dE` for `t >= 0`.
pub fn direct_survival(state: &PreparedState, t: f64) -> Result<Complex64> {
    GamowKind::Decaying.check_time(t)?;
    if t == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    state.oscillatory_segment(0.0, t)
}

/// Residue coefficient `c = -2 pi i h(k) / F'(k)` of a swept Jost zero.
pub fn gamow_coefficient(state: &PreparedState, pole: &ResonancePole) -> Result<Complex64> {
    coefficient_with_derivative(state, pole.momentum(), pole.jost_derivative())
}

/// As [`gamow_coefficient`], with a caller-supplied `F'(k)`.
pub fn coefficient_with_derivative(
    state: &PreparedState,
    k: Complex64,
    derivative: Complex64,
) -> Result<Complex64> {
    let scale = jost_function(state.model(), -k)?.norm().max(1.0);
    if !(derivative.norm() > 1e-10 * scale) {
        return Err(Error::DegeneratePole {
            k,
            derivative: derivative.norm(),
        });
    }
    for (s, _) in state.reflected_singularities() {
        if (s - k).norm() < AVOIDANCE_MARGIN {
            return Err(Error::Domain(format!(
                "state numerator is singular at the pole k = {k}"
            )));
        }
    }
    Ok(Complex64::new(0.0, -2.0 * PI) * state.residue_numerator(k)? / derivative)
}

/// The rotated ray `k = kappa e^{-i theta}`, `0 <= kappa <= radial_cutoff`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedContour {
    theta: f64,
    radial_cutoff: f64,
    node_count: usize,
}

impl RotatedContour {
    pub fn new(theta: f64, radial_cutoff: f64, node_count: usize) -> Result<Self> {
        if !(theta > 0.0 && theta <= PI / 4.0) {
            return Err(Error::Domain(format!(
                "contour angle must lie in (0, pi/4], got {theta}"
            )));
        }
        if !(radial_cutoff > 0.0 && radial_cutoff.is_finite()) {
            return Err(Error::Domain(format!(
                "radial cutoff must be positive, got {radial_cutoff}"
            )));
        }
        if node_count == 0 {
            return Err(Error::Domain("contour needs at least one node".into()));
        }
        Ok(Self {
            theta,
            radial_cutoff,
            node_count,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn radial_cutoff(&self) -> f64 {
        self.radial_cutoff
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Strictly inside the swept sector.
    pub fn contains(&self, k: Complex64) -> bool {
        let arg = k.arg();
        arg < 0.0 && arg > -self.theta && k.norm() < self.radial_cutoff
    }

    /// Distance from `k` to the ray and the arc.
    pub fn distance(&self, k: Complex64) -> f64 {
        let dir = Complex64::from_polar(1.0, -self.theta);
        let along = (k * dir.conj()).re.clamp(0.0, self.radial_cutoff);
        let to_ray = (k - dir * along).norm();
        let arg = k.arg().clamp(-self.theta, 0.0);
        let to_arc = (k - Complex64::from_polar(self.radial_cutoff, arg)).norm();
        to_ray.min(to_arc)
    }

    /// Rectangle covering the sector, for handing to `scan_poles`.
    pub fn sweep_region(&self, grid_density: f64) -> Result<SearchRegion> {
        let r = self.radial_cutoff;
        SearchRegion::new(1e-3 * r, r, -r * self.theta.sin(), 0.0, grid_density)
    }
}

/// One Gamow term `c e^{-i z t}`; `id` indexes the pole list handed in.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleTerm {
    pub id: usize,
    pub pole: ResonancePole,
    pub coefficient: Complex64,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalDecomposition {
    pub t: f64,
    pub pole_terms: Vec<PoleTerm>,
    pub background: Complex64,
    pub direct: Complex64,
    /// `|sum + background - direct| / |direct|` actually achieved.
    pub reconstruction_error: f64,
}

impl SurvivalDecomposition {
    pub fn pole_sum(&self) -> Complex64 {
        self.pole_terms.iter().map(|p| p.value).sum()
    }

    pub fn reconstructed(&self) -> Complex64 {
        self.pole_sum() + self.background
    }
}

#[derive(Debug, Clone, Copy)]
struct SweptSingularity {
    k: Complex64,
    radius: f64,
}

/// Contour data for one state and one pole set, reusable across times.
#[derive(Debug, Clone)]
pub struct SpectralDecomposer {
    state: PreparedState,
    contour: RotatedContour,
    terms: Vec<(usize, ResonancePole, Complex64)>,
    swept: Vec<SweptSingularity>,
}

impl SpectralDecomposer {
    /// Selects the poles swept by `contour`, checks that they are all of
    /// them, and computes their coefficients.
    pub fn new(
        state: &PreparedState,
        poles: &[ResonancePole],
        contour: &RotatedContour,
    ) -> Result<Self> {
        Self::build(state, poles, contour, true)
    }

    fn build(
        state: &PreparedState,
        poles: &[ResonancePole],
        contour: &RotatedContour,
        complete: bool,
    ) -> Result<Self> {
        let model = state.model();
        let mut terms = Vec::new();
        for (id, pole) in poles.iter().enumerate() {
            let k = pole.momentum();
            let distance = contour.distance(k);
            if distance < AVOIDANCE_MARGIN {
                return Err(Error::Contour { k, distance });
            }
            if pole.kind() == GamowKind::Decaying && contour.contains(k) {
                terms.push((id, *pole, gamow_coefficient(state, pole)?));
            }
        }

        if complete && !model.is_free() {
            let n_boundary =
                (60.0 * contour.radial_cutoff * (2.0 + contour.theta)).max(600.0) as usize;
            let expected =
                count_zeros_in_sector(model, contour.theta, contour.radial_cutoff, n_boundary)?;
            if expected != terms.len() as i64 {
                return Err(Error::IncompleteScan {
                    found: terms.len(),
                    expected,
                });
            }
        }

        let mut swept = Vec::new();
        let all: Vec<Complex64> = state
            .reflected_singularities()
            .iter()
            .map(|&(s, _)| s)
            .collect();
        for (j, &s) in all.iter().enumerate() {
            let distance = contour.distance(s);
            if distance < AVOIDANCE_MARGIN {
                return Err(Error::Contour { k: s, distance });
            }
            if !contour.contains(s) {
                continue;
            }
            let mut radius = (0.25 * distance).min(0.05 * s.norm()).min(0.5);
            for (i, &o) in all.iter().enumerate() {
                if i != j && o != s {
                    radius = radius.min(0.25 * (o - s).norm());
                }
            }
            for (_, pole, _) in &terms {
                radius = radius.min(0.25 * (pole.momentum() - s).norm());
            }
            if all[..j].contains(&s) {
                continue;
            }
            swept.push(SweptSingularity { k: s, radius });
        }

        Ok(Self {
            state: state.clone(),
            contour: *contour,
            terms,
            swept,
        })
    }

    pub fn state(&self) -> &PreparedState {
        &self.state
    }

    pub fn contour(&self) -> &RotatedContour {
        &self.contour
    }

    /// Swept poles with their list index and coefficient.
    pub fn coefficients(&self) -> impl Iterator<Item = (usize, &ResonancePole, Complex64)> {
        self.terms.iter().map(|(id, p, c)| (*id, p, *c))
    }

    pub fn pole_terms(&self, t: f64) -> Result<Vec<PoleTerm>> {
        GamowKind::Decaying.check_time(t)?;
        Ok(self
            .terms
            .iter()
            .map(|(id, pole, c)| PoleTerm {
                id: *id,
                pole: *pole,
                coefficient: *c,
                value: c * (-I * pole.energy() * t).exp(),
            })
            .collect())
    }

    /// Ray, arc, real tail and swept state residues at time `t`.
    pub fn background(&self, t: f64) -> Result<Complex64> {
        GamowKind::Decaying.check_time(t)?;
        let c = &self.contour;
        let r = c.radial_cutoff;
        let dir = Complex64::from_polar(1.0, -c.theta);
        let ray = self.path_integral(|s| (dir * (s * r), dir * r), t)?;
        // From R e^{-i theta} back up to R.
        let arc = self.path_integral(
            |s| {
                let k = Complex64::from_polar(r, -c.theta * (1.0 - s));
                (k, I * c.theta * k)
            },
            t,
        )?;
        let tail = self.state.oscillatory_segment(r * r, t)?;
        let mut residues = Complex64::new(0.0, 0.0);
        for sing in &self.swept {
            residues -= self.circle_integral(sing, t)?;
        }
        Ok(ray + arc + tail + residues)
    }

    /// Full decomposition at `t`, failing if the identity misses by more
    /// than `recon_tol` relative to `|direct|`.
    pub fn at(&self, t: f64, recon_tol: f64) -> Result<SurvivalDecomposition> {
        let pole_terms = self.pole_terms(t)?;
        let background = self.background(t)?;
        let direct = direct_survival(&self.state, t)?;
        let sum: Complex64 = pole_terms.iter().map(|p| p.value).sum();
        let reconstructed = sum + background;
        let reconstruction_error = (reconstructed - direct).norm() / direct.norm().max(1e-300);
        if !(reconstruction_error <= recon_tol) {
            return Err(Error::Decomposition {
                reconstructed,
                direct,
            });
        }
        Ok(SurvivalDecomposition {
            t,
            pole_terms,
            background,
            direct,
            reconstruction_error,
        })
    }

    fn integrand(&self, k: Complex64, t: f64) -> Result<(Complex64, f64)> {
        let model = self.state.model();
        let f = jost_function(model, k)?;
        let df = jost_derivative(model, k)?;
        let proximity = if df.norm() > 0.0 {
            (f / df).norm()
        } else {
            f64::INFINITY
        };
        let value = self.state.residue_numerator(k)? / f * (-I * k * k * t).exp();
        Ok((value, proximity))
    }

    fn path_integral<P: Fn(f64) -> (Complex64, Complex64)>(
        &self,
        path: P,
        t: f64,
    ) -> Result<Complex64> {
        let mut failure = None;
        let mut closest: Option<(f64, Complex64)> = None;
        let points: Vec<f64> = (0..=self.contour.node_count)
            .map(|j| j as f64 / self.contour.node_count as f64)
            .collect();
        let r = integrate(
            |s| {
                let (k, tangent) = path(s);
                match self.integrand(k, t) {
                    Ok((v, d)) => {
                        if closest.is_none_or(|(c, _)| d < c) {
                            closest = Some((d, k));
                        }
                        v * tangent
                    }
                    Err(e) => {
                        failure.get_or_insert(e);
                        Complex64::new(0.0, 0.0)
                    }
                }
            },
            &points,
            &self.state.opts,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        if let Some((distance, k)) = closest {
            if distance < AVOIDANCE_MARGIN {
                return Err(Error::Contour { k, distance });
            }
        }
        Ok(r?.value)
    }

    // Counter-clockwise trapezoid rule, spectrally accurate on a circle that
    // encloses no other singularity.
    fn circle_integral(&self, sing: &SweptSingularity, t: f64) -> Result<Complex64> {
        let mut radius = sing.radius;
        for _ in 0..8 {
            let mut total = Complex64::new(0.0, 0.0);
            let mut closest = f64::INFINITY;
            for j in 0..CIRCLE_NODES {
                let offset =
                    Complex64::from_polar(radius, 2.0 * PI * j as f64 / CIRCLE_NODES as f64);
                let (v, d) = self.integrand(sing.k + offset, t)?;
                closest = closest.min(d);
                total += v * I * offset;
            }
            if closest > radius {
                return Ok(total * (2.0 * PI / CIRCLE_NODES as f64));
            }
            radius *= 0.5;
        }
        Err(Error::Contour {
            k: sing.k,
            distance: radius,
        })
    }
}

/// One-shot decomposition at a single time.
pub fn decompose(
    state: &PreparedState,
    poles: &[ResonancePole],
    contour: &RotatedContour,
    t: f64,
    recon_tol: f64,
) -> Result<SurvivalDecomposition> {
    SpectralDecomposer::new(state, poles, contour)?.at(t, recon_tol)
}

/// Background at a single time: ray, arc, real tail and swept state
/// residues. Jost zeros near the contour are still detected.
pub fn background_integral(
    state: &PreparedState,
    contour: &RotatedContour,
    t: f64,
) -> Result<Complex64> {
    SpectralDecomposer::build(state, &[], contour, false)?.background(t)
}
