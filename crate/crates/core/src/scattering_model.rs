//! The s-wave delta-shell potential `V(r) = lambda * delta(r - a)`.
//!
//! Units are fixed throughout the crate: hbar = 1 and 2m = 1, so `E = k^2`
//! and a lifetime is the plain reciprocal of a width.
//!
//! Matching the regular solution `sin(kr)/k` across the shell gives the Jost
//! function
//!
//! ```text
//! F(k) = 1 + (lambda / k) sin(k a) e^{i k a}
//!      = 1 + lambda a g(2 i k a),      g(x) = (e^x - 1) / x,
//! ```
//!
//! normalised so that the regular solution behaves as
//! `(i / 2k) [F(k) e^{-ikr} - F(-k) e^{ikr}]` outside the shell.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Energy on the sheet selected by `k` (`E = k^2`).
pub fn energy(k: Complex64) -> Complex64 {
    k * k
}

/// Physical-sheet momentum `k = +sqrt(E)` (principal branch).
pub fn momentum(e: Complex64) -> Complex64 {
    e.sqrt()
}

/// Lifetime of a level of width `gamma` (`tau = hbar / gamma`, hbar = 1).
pub fn lifetime(gamma: f64) -> f64 {
    1.0 / gamma
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaShellModel {
    lambda: f64,
    radius: f64,
}

impl DeltaShellModel {
    pub fn new(lambda: f64, radius: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::Domain(format!(
                "coupling must be finite, got {lambda}"
            )));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Domain(format!(
                "shell radius must be positive, got {radius}"
            )));
        }
        Ok(Self { lambda, radius })
    }

    pub fn free(radius: f64) -> Result<Self> {
        Self::new(0.0, radius)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn is_free(&self) -> bool {
        self.lambda == 0.0
    }
}

// g(x) = (e^x - 1)/x and g'(x), with series near the removable point x = 0.
fn expm1_ratio(x: Complex64) -> (Complex64, Complex64) {
    if x.norm() < 0.5 {
        // g(x) = sum x^n/(n+1)!, g'(x) = sum n x^(n-1)/(n+1)!
        let mut g = Complex64::new(0.0, 0.0);
        let mut dg = Complex64::new(0.0, 0.0);
        let mut prev = Complex64::new(0.0, 0.0); // x^(n-1)
        let mut power = Complex64::new(1.0, 0.0); // x^n
        let mut fact = 1.0; // (n+1)!
        for n in 0..30 {
            fact *= (n + 1) as f64;
            dg += prev * (n as f64) / fact;
            g += power / fact;
            prev = power;
            power *= x;
        }
        (g, dg)
    } else {
        let ex = x.exp();
        let g = (ex - 1.0) / x;
        let dg = (ex * x - ex + 1.0) / (x * x);
        (g, dg)
    }
}

fn check_finite(k: Complex64) -> Result<()> {
    if k.re.is_finite() && k.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("momentum must be finite, got {k}")))
    }
}

fn check_result(k: Complex64, v: Complex64) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("Jost function overflows at k = {k}")))
    }
}

/// s-wave Jost function `F(k)`; finite at `k = 0` where it equals `1 + lambda a`.
pub fn jost_function(model: &DeltaShellModel, k: Complex64) -> Result<Complex64> {
    check_finite(k)?;
    let a = model.radius;
    let (g, _) = expm1_ratio(Complex64::new(0.0, 2.0 * a) * k);
    check_result(k, 1.0 + model.lambda * a * g)
}

/// Closed-form `dF/dk`.
pub fn jost_derivative(model: &DeltaShellModel, k: Complex64) -> Result<Complex64> {
    check_finite(k)?;
    let a = model.radius;
    let i2a = Complex64::new(0.0, 2.0 * a);
    let (_, dg) = expm1_ratio(i2a * k);
    check_result(k, model.lambda * a * dg * i2a)
}

/// `S(k) = F(-k) / F(k)`. Fails with [`Error::Pole`] on a zero of `F`.
pub fn s_matrix(model: &DeltaShellModel, k: Complex64) -> Result<Complex64> {
    let denom = jost_function(model, k)?;
    let numer = jost_function(model, -k)?;
    if denom.norm() <= 1e-14 * numer.norm().max(1.0) {
        return Err(Error::Pole { k });
    }
    Ok(numer / denom)
}

/// Brute-force Jost function from the radial equation `u'' + k^2 u = V u`.
///
/// Integrates the regular solution (`u(0) = 0`, `u'(0) = 1`) with classical
/// RK4 out to `2a`, applying the derivative jump `lambda u(a)` at the shell,
/// and reads off `F(k) = e^{ikr} (u'(r) - i k u(r))` in the free region. The
/// integration is repeated with half the step; if the two results differ by
/// more than `1e-6` (relative) the oracle reports [`Error::Oracle`].
pub fn radial_ode_oracle(model: &DeltaShellModel, k: Complex64, step: f64) -> Result<Complex64> {
    check_finite(k)?;
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Domain(format!(
            "ODE step must be positive, got {step}"
        )));
    }
    let coarse = integrate_radial(model, k, step);
    let fine = integrate_radial(model, k, 0.5 * step);
    let difference = (fine - coarse).norm() / fine.norm().max(1e-300);
    if !difference.is_finite() || difference > 1e-6 {
        return Err(Error::Oracle { difference });
    }
    // Richardson extrapolation for a fourth-order method.
    Ok(fine + (fine - coarse) / 15.0)
}

fn integrate_radial(model: &DeltaShellModel, k: Complex64, step: f64) -> Complex64 {
    let k2 = k * k;
    let rhs = |u: Complex64, du: Complex64| (du, -k2 * u);
    let rk4 = |u: &mut Complex64, du: &mut Complex64, h: f64| {
        let (a1, b1) = rhs(*u, *du);
        let (a2, b2) = rhs(*u + a1 * (0.5 * h), *du + b1 * (0.5 * h));
        let (a3, b3) = rhs(*u + a2 * (0.5 * h), *du + b2 * (0.5 * h));
        let (a4, b4) = rhs(*u + a3 * h, *du + b3 * h);
        *u += (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (h / 6.0);
        *du += (b1 + b2 * 2.0 + b3 * 2.0 + b4) * (h / 6.0);
    };

    let a = model.radius;
    let mut u = Complex64::new(0.0, 0.0);
    let mut du = Complex64::new(1.0, 0.0);

    let n_inner = (a / step).ceil() as usize;
    let h_inner = a / n_inner as f64;
    for _ in 0..n_inner {
        rk4(&mut u, &mut du, h_inner);
    }
    du += model.lambda * u;
    for _ in 0..n_inner {
        rk4(&mut u, &mut du, h_inner);
    }

    let r = 2.0 * a;
    let ikr = Complex64::new(0.0, 1.0) * k * r;
    ikr.exp() * (du - Complex64::new(0.0, 1.0) * k * u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn free_particle_has_unit_jost_function() {
        let m = DeltaShellModel::free(1.0).unwrap();
        assert_eq!(jost_function(&m, c(1.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(s_matrix(&m, c(2.5, 0.0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn zero_momentum_limit_is_finite() {
        let m = DeltaShellModel::new(10.0, 1.0).unwrap();
        let f0 = jost_function(&m, c(0.0, 0.0)).unwrap();
        assert!((f0 - c(11.0, 0.0)).norm() < 1e-14);
        let near = jost_function(&m, c(1e-7, 0.0)).unwrap();
        assert!((near - f0).norm() < 1e-5);
    }

    #[test]
    fn closed_form_agrees_with_trig_form() {
        let m = DeltaShellModel::new(7.0, 1.3).unwrap();
        for k in [
            c(2.0, 0.0),
            c(0.3, -0.2),
            c(5.0, -1.0),
            c(-1.5, 0.7),
            c(0.1, 0.05),
        ] {
            let trig = 1.0 + 7.0 / k * (k * 1.3).sin() * (c(0.0, 1.3) * k).exp();
            assert!((jost_function(&m, k).unwrap() - trig).norm() < 1e-12);
        }
    }

    #[test]
    fn analytic_derivative_matches_difference_quotient() {
        let m = DeltaShellModel::new(10.0, 1.0).unwrap();
        for k in [c(2.9, -0.07), c(0.2, 0.1), c(6.0, -1.5)] {
            let h = 1e-6;
            let fd =
                (jost_function(&m, k + h).unwrap() - jost_function(&m, k - h).unwrap()) / (2.0 * h);
            let exact = jost_derivative(&m, k).unwrap();
            assert!((fd - exact).norm() < 1e-7 * exact.norm().max(1.0));
        }
    }

    #[test]
    fn large_real_momentum_tends_to_one() {
        let m = DeltaShellModel::new(5.0, 1.0).unwrap();
        for k in [1e2, 1e3, 1e4] {
            let f = jost_function(&m, c(k, 0.0)).unwrap();
            assert!((f - 1.0).norm() <= 5.0 / k * 1.0001);
        }
    }

    #[test]
    fn non_finite_input_is_a_domain_error() {
        let m = DeltaShellModel::new(5.0, 1.0).unwrap();
        let err = jost_function(&m, c(f64::NAN, 0.0)).unwrap_err();
        assert_eq!(err.name(), "DomainError");
        assert!(DeltaShellModel::new(1.0, 0.0).is_err());
        assert!(DeltaShellModel::new(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn real_axis_unitarity() {
        let m = DeltaShellModel::new(7.0, 1.0).unwrap();
        let s = s_matrix(&m, c(2.0, 0.0)).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ode_oracle_free_particle() {
        let m = DeltaShellModel::free(1.0).unwrap();
        let f = radial_ode_oracle(&m, c(1.0, 0.0), 1e-4).unwrap();
        assert!((f - 1.0).norm() < 1e-6);
    }

    #[test]
    fn ode_oracle_matches_closed_form() {
        let m = DeltaShellModel::new(10.0, 1.0).unwrap();
        let f = jost_function(&m, c(3.0, 0.0)).unwrap();
        let o = radial_ode_oracle(&m, c(3.0, 0.0), 1e-4).unwrap();
        assert!((f - o).norm() < 1e-8 * f.norm());
        for k in [c(1.5, 0.0), c(1.5, -0.2)] {
            let f = jost_function(&m, k).unwrap();
            let o = radial_ode_oracle(&m, k, 1e-4).unwrap();
            assert!((f - o).norm() < 1e-6);
        }
    }

    #[test]
    fn ode_oracle_rejects_coarse_step() {
        let m = DeltaShellModel::new(10.0, 1.0).unwrap();
        let err = radial_ode_oracle(&m, c(30.0, 0.0), 0.2).unwrap_err();
        assert_eq!(err.name(), "OracleError");
    }

    #[test]
    fn energy_and_lifetime_units() {
        assert_eq!(energy(c(3.0, -1.0)), c(8.0, -6.0));
        assert!((momentum(c(8.0, -6.0)) - c(3.0, -1.0)).norm() < 1e-15);
        assert_eq!(lifetime(0.25), 4.0);
    }
}
