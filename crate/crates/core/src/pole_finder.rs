//! Zeros of the Jost function in the lower half of the momentum plane.
//!
//! A zero `k` with `Im k < 0` is a pole of `S(k) = F(-k)/F(k)` on the second
//! energy sheet at `z = k^2`. Zeros come in pairs `k`, `-conj(k)`: the one
//! with `Re k > 0` gives the decaying pole `E_R - i Gamma/2`, its partner the
//! growing pole `E_R + i Gamma/2`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gamow_states::GamowKind;
use crate::quadrature::{integrate, QuadOptions};
use crate::scattering_model::{jost_derivative, jost_function, DeltaShellModel};

const MAX_NEWTON_ITERATIONS: usize = 100;
const DERIVATIVE_STEP: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRegion {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    /// Seed points per unit length used by [`scan_poles`].
    pub grid_density: f64,
}

impl SearchRegion {
    pub fn new(
        re_min: f64,
        re_max: f64,
        im_min: f64,
        im_max: f64,
        grid_density: f64,
    ) -> Result<Self> {
        let all_finite = [re_min, re_max, im_min, im_max, grid_density]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite || re_min >= re_max || im_min >= im_max || grid_density <= 0.0 {
            return Err(Error::Domain(format!(
                "invalid search region [{re_min}, {re_max}] x [{im_min}, {im_max}] with density {grid_density}"
            )));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
            grid_density,
        })
    }

    pub fn contains(&self, k: Complex64) -> bool {
        k.re > self.re_min && k.re < self.re_max && k.im > self.im_min && k.im < self.im_max
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * ((self.re_max - self.re_min) + (self.im_max - self.im_min))
    }

    pub fn with_density(&self, grid_density: f64) -> Self {
        Self {
            grid_density,
            ..*self
        }
    }

    /// The two halves obtained by cutting at `Re k = re`.
    pub fn split_re(&self, re: f64) -> (Self, Self) {
        (
            Self {
                re_max: re,
                ..*self
            },
            Self {
                re_min: re,
                ..*self
            },
        )
    }

    /// The two halves obtained by cutting at `Im k = im`.
    pub fn split_im(&self, im: f64) -> (Self, Self) {
        (
            Self {
                im_max: im,
                ..*self
            },
            Self {
                im_min: im,
                ..*self
            },
        )
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    fn seeds(&self) -> Vec<Complex64> {
        let nx = ((self.re_max - self.re_min) * self.grid_density)
            .ceil()
            .max(1.0) as usize;
        let ny = ((self.im_max - self.im_min) * self.grid_density)
            .ceil()
            .max(1.0) as usize;
        let dx = (self.re_max - self.re_min) / nx as f64;
        let dy = (self.im_max - self.im_min) / ny as f64;
        let mut out = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                out.push(Complex64::new(
                    self.re_min + (i as f64 + 0.5) * dx,
                    self.im_min + (j as f64 + 0.5) * dy,
                ));
            }
        }
        out
    }
}

/// A simple zero of the Jost function off the imaginary axis in the lower
/// half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonancePole {
    k: Complex64,
    jost_derivative: Complex64,
}

impl ResonancePole {
    pub fn new(k: Complex64, jost_derivative: Complex64) -> Result<Self> {
        if !(k.im < 0.0) {
            return Err(Error::NotAResonance {
                k,
                reason: "zero is not in the lower half-plane",
            });
        }
        if k.re.abs() <= 1e-10 * k.norm() {
            return Err(Error::NotAResonance {
                k,
                reason: "zero on the negative imaginary axis (virtual state)",
            });
        }
        Ok(Self { k, jost_derivative })
    }

    pub fn momentum(&self) -> Complex64 {
        self.k
    }

    /// Complex energy `z = k^2`.
    pub fn energy(&self) -> Complex64 {
        self.k * self.k
    }

    pub fn resonance_energy(&self) -> f64 {
        self.energy().re
    }

    /// Width, always positive; the sign of `Im z` is carried by [`Self::kind`].
    pub fn width(&self) -> f64 {
        2.0 * self.energy().im.abs()
    }

    pub fn jost_derivative(&self) -> Complex64 {
        self.jost_derivative
    }

    pub fn kind(&self) -> GamowKind {
        if self.k.re > 0.0 {
            GamowKind::Decaying
        } else {
            GamowKind::Growing
        }
    }

    /// The zero at `-conj(k)`, i.e. the pole at `conj(z)`.
    ///
    /// Uses `F(-conj k) = conj F(k)`, so `F'(-conj k) = -conj F'(k)`.
    pub fn partner(&self) -> Self {
        Self {
            k: -self.k.conj(),
            jost_derivative: -self.jost_derivative.conj(),
        }
    }
}

/// `dF/dk` from central differences with two levels of Richardson
/// extrapolation, starting from the step `step * max(|k|, 1)`.
pub fn numerical_jost_derivative(
    model: &DeltaShellModel,
    k: Complex64,
    step: f64,
) -> Result<Complex64> {
    let h0 = step * k.norm().max(1.0);
    let central = |h: f64| -> Result<Complex64> {
        Ok((jost_function(model, k + h)? - jost_function(model, k - h)?) / (2.0 * h))
    };
    let d1 = central(h0)?;
    let d2 = central(0.5 * h0)?;
    let d3 = central(0.25 * h0)?;
    let r1 = (d2 * 4.0 - d1) / 3.0;
    let r2 = (d3 * 4.0 - d2) / 3.0;
    Ok((r2 * 16.0 - r1) / 15.0)
}

/// Damped Newton iteration for `F(k) = 0` starting at `seed`.
///
/// Converged when both `|F(k)|` and the full Newton step are below `tol`.
pub fn find_pole(model: &DeltaShellModel, seed: Complex64, tol: f64) -> Result<ResonancePole> {
    let (k, d) = newton(model, seed, tol)?;
    ResonancePole::new(k, d)
}

fn newton(model: &DeltaShellModel, seed: Complex64, tol: f64) -> Result<(Complex64, Complex64)> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut k = seed;
    let mut f = jost_function(model, k)?;
    for iteration in 0..MAX_NEWTON_ITERATIONS {
        let d = numerical_jost_derivative(model, k, DERIVATIVE_STEP)?;
        let full_step = -f / d;
        if !(full_step.re.is_finite() && full_step.im.is_finite()) {
            return Err(Error::Convergence {
                iterations: iteration,
                residual: f.norm(),
            });
        }
        if f.norm() < tol && full_step.norm() < tol {
            return Ok((k, d));
        }

        let max_step = 0.5 * k.norm().max(1.0);
        let mut step = if full_step.norm() > max_step {
            full_step * (max_step / full_step.norm())
        } else {
            full_step
        };
        let mut next = k + step;
        let mut f_next = jost_function(model, next);
        for _ in 0..40 {
            match f_next {
                Ok(v) if v.norm() < f.norm() || step.norm() < tol => break,
                _ => {
                    step *= 0.5;
                    next = k + step;
                    f_next = jost_function(model, next);
                }
            }
        }
        k = next;
        f = f_next?;
    }
    Err(Error::Convergence {
        iterations: MAX_NEWTON_ITERATIONS,
        residual: f.norm(),
    })
}

/// Number of boundary nodes used by [`scan_poles`] for its completeness check.
pub fn default_boundary_nodes(region: &SearchRegion) -> usize {
    ((60.0 * region.perimeter()).ceil() as usize).max(600)
}

/// Zeros of `F` inside the rectangle, counted with multiplicity via the
/// winding number `(1 / 2 pi i) * contour integral of F'/F`.
pub fn count_zeros(
    model: &DeltaShellModel,
    region: &SearchRegion,
    n_boundary: usize,
) -> Result<i64> {
    let corners = region.corners();
    let edges: Vec<Path> = (0..4)
        .map(|i| Path::Segment(corners[i], corners[(i + 1) % 4]))
        .collect();
    winding_number(model, &edges, n_boundary)
}

/// Zeros of `F` inside the sector `-theta < arg k < 0`, `|k| < radius`.
pub fn count_zeros_in_sector(
    model: &DeltaShellModel,
    theta: f64,
    radius: f64,
    n_boundary: usize,
) -> Result<i64> {
    if !(theta > 0.0 && theta < PI && radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain(format!(
            "invalid sector: theta = {theta}, radius = {radius}"
        )));
    }
    let tip = Complex64::from_polar(radius, -theta);
    let zero = Complex64::new(0.0, 0.0);
    let path = [
        Path::Segment(zero, tip),
        Path::Arc {
            radius,
            from: -theta,
            to: 0.0,
        },
        Path::Segment(Complex64::new(radius, 0.0), zero),
    ];
    winding_number(model, &path, n_boundary)
}

#[derive(Debug, Clone, Copy)]
enum Path {
    Segment(Complex64, Complex64),
    // Centred on the origin, angles in radians.
    Arc { radius: f64, from: f64, to: f64 },
}

impl Path {
    fn length(&self) -> f64 {
        match *self {
            Path::Segment(a, b) => (b - a).norm(),
            Path::Arc { radius, from, to } => radius * (to - from).abs(),
        }
    }

    // Point and tangent at parameter s in [0, 1].
    fn at(&self, s: f64) -> (Complex64, Complex64) {
        match *self {
            Path::Segment(a, b) => (a + (b - a) * s, b - a),
            Path::Arc { radius, from, to } => {
                let k = Complex64::from_polar(radius, from + (to - from) * s);
                (k, Complex64::new(0.0, to - from) * k)
            }
        }
    }
}

fn winding_number(model: &DeltaShellModel, path: &[Path], n_boundary: usize) -> Result<i64> {
    let perimeter: f64 = path.iter().map(Path::length).sum();
    let near = 1e-6 * perimeter.max(1.0);
    let opts = QuadOptions {
        abs_tol: 1e-9,
        rel_tol: 0.0,
        max_intervals: 100_000,
    };

    let mut total = Complex64::new(0.0, 0.0);
    for piece in path {
        let panels =
            ((n_boundary as f64 * piece.length() / perimeter / 15.0).ceil() as usize).max(1);
        let points: Vec<f64> = (0..=panels).map(|j| j as f64 / panels as f64).collect();

        let mut failure = None;
        let mut closest: Option<(f64, Complex64)> = None;
        let r = integrate(
            |s| {
                let (k, tangent) = piece.at(s);
                match (jost_function(model, k), jost_derivative(model, k)) {
                    (Ok(f), Ok(df)) => {
                        let dist = if df.norm() > 0.0 {
                            (f / df).norm()
                        } else {
                            f64::INFINITY
                        };
                        if closest.is_none_or(|(d, _)| dist < d) {
                            closest = Some((dist, k));
                        }
                        df / f * tangent
                    }
                    (Err(e), _) | (_, Err(e)) => {
                        failure.get_or_insert(e);
                        Complex64::new(0.0, 0.0)
                    }
                }
            },
            &points,
            &opts,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        if let Some((distance, k)) = closest {
            if distance < near {
                return Err(Error::Boundary { k, distance });
            }
        }
        total += r?.value;
    }

    let winding = total / Complex64::new(0.0, 2.0 * PI);
    let rounded = winding.re.round();
    if (winding.re - rounded).abs() > 0.1 || winding.im.abs() > 0.1 {
        return Err(Error::Quadrature {
            reason: "winding number is not an integer".into(),
            value: winding,
            error: (winding - rounded).norm(),
        });
    }
    Ok(rounded as i64)
}

/// All resonance poles inside `region`, sorted by resonance energy.
///
/// Newton is seeded on a uniform grid; converged zeros closer than `10 * tol`
/// are merged. The result is certified against [`count_zeros`].
pub fn scan_poles(
    model: &DeltaShellModel,
    region: &SearchRegion,
    tol: f64,
) -> Result<Vec<ResonancePole>> {
    if region.im_max > 0.0 {
        return Err(Error::Domain(format!(
            "resonance search region must lie in Im k <= 0, got im_max = {}",
            region.im_max
        )));
    }
    let expected = count_zeros(model, region, default_boundary_nodes(region))?;
    if model.is_free() {
        return if expected == 0 {
            Ok(Vec::new())
        } else {
            Err(Error::IncompleteScan { found: 0, expected })
        };
    }

    let mut zeros: Vec<ResonancePole> = region
        .seeds()
        .into_iter()
        .filter_map(|seed| find_pole(model, seed, tol).ok())
        .filter(|p| region.contains(p.momentum()))
        .collect();

    zeros.sort_by(|a, b| {
        a.momentum()
            .re
            .total_cmp(&b.momentum().re)
            .then(a.momentum().im.total_cmp(&b.momentum().im))
    });
    let radius = 10.0 * tol;
    let mut unique: Vec<ResonancePole> = Vec::new();
    for z in zeros {
        if !unique
            .iter()
            .any(|u| (u.momentum() - z.momentum()).norm() <= radius)
        {
            unique.push(z);
        }
    }

    if unique.len() as i64 != expected {
        return Err(Error::IncompleteScan {
            found: unique.len(),
            expected,
        });
    }
    unique.sort_by(|a, b| a.resonance_energy().total_cmp(&b.resonance_energy()));
    Ok(unique)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn model(lambda: f64) -> DeltaShellModel {
        DeltaShellModel::new(lambda, 1.0).unwrap()
    }

    #[test]
    fn free_model_never_converges() {
        let err = find_pole(&model(0.0), c(3.0, -0.3), 1e-12).unwrap_err();
        assert_eq!(err.name(), "ConvergenceError");
    }

    #[test]
    fn free_model_has_no_zeros() {
        let region = SearchRegion::new(0.5, 10.0, -2.0, 0.0, 4.0).unwrap();
        assert_eq!(count_zeros(&model(0.0), &region, 600).unwrap(), 0);
        assert!(scan_poles(&model(0.0), &region, 1e-12).unwrap().is_empty());
    }

    #[test]
    fn richardson_derivative_is_accurate() {
        let m = model(10.0);
        for k in [c(2.88, -0.07), c(8.9, -0.35), c(0.3, 0.0)] {
            let exact = jost_derivative(&m, k).unwrap();
            let approx = numerical_jost_derivative(&m, k, DERIVATIVE_STEP).unwrap();
            assert!((exact - approx).norm() < 1e-10 * exact.norm().max(1.0));
        }
    }

    #[test]
    fn bound_state_is_reported_distinctly() {
        // Attractive shell: bound state on the positive imaginary axis.
        let m = model(-3.0);
        let err = find_pole(&m, c(0.0, 1.0), 1e-12).unwrap_err();
        assert_eq!(err.name(), "NotAResonance");
    }

    #[test]
    fn zero_on_boundary_is_detected() {
        let m = model(10.0);
        let p = find_pole(&m, c(3.0, -0.3), 1e-12).unwrap();
        let k = p.momentum();
        let region = SearchRegion::new(k.re, 3.5, -1.0, 0.0, 4.0).unwrap();
        assert_eq!(
            count_zeros(&m, &region, 600).unwrap_err().name(),
            "BoundaryError"
        );
    }

    #[test]
    fn scan_requires_lower_half_plane() {
        let region = SearchRegion::new(0.5, 10.0, -2.0, 0.5, 4.0).unwrap();
        assert_eq!(
            scan_poles(&model(10.0), &region, 1e-12).unwrap_err().name(),
            "DomainError"
        );
    }

    #[test]
    fn invalid_region_is_rejected() {
        assert!(SearchRegion::new(1.0, 0.5, -1.0, 0.0, 1.0).is_err());
        assert!(SearchRegion::new(0.0, 1.0, 0.0, 0.0, 1.0).is_err());
        assert!(SearchRegion::new(0.0, 1.0, -1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn sector_count_matches_known_poles() {
        // For lambda = 10 the first three zeros have arg -0.023, -0.035, -0.039.
        let m = model(10.0);
        assert_eq!(count_zeros_in_sector(&m, PI / 4.0, 10.5, 1200).unwrap(), 3);
        assert_eq!(count_zeros_in_sector(&m, PI / 4.0, 7.0, 1200).unwrap(), 2);
        assert_eq!(count_zeros_in_sector(&m, 0.01, 10.5, 1200).unwrap(), 0);
    }

    #[test]
    fn partner_has_conjugate_energy() {
        let p = find_pole(&model(10.0), c(3.0, -0.3), 1e-12).unwrap();
        let q = p.partner();
        assert_eq!(q.kind(), GamowKind::Growing);
        assert!((q.energy() - p.energy().conj()).norm() < 1e-12);
        assert_eq!(q.width(), p.width());
    }
}
