//! Globally adaptive Gauss-Kronrod (7/15) quadrature for complex-valued
//! integrands of one real variable, plus the complex exponential integral
//! used to close oscillatory tails analytically.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_intervals: 200_000,
        }
    }
}

impl QuadOptions {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    // Error estimate that floating-point cancellation alone would produce.
    floor: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // Largest error first; ties broken by position so the refinement order
    // (and therefore the result) is reproducible bit for bit.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let mut fv1 = [Complex64::new(0.0, 0.0); 7];
    let mut fv2 = [Complex64::new(0.0, 0.0); 7];
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut res_abs = WGK[7] * fc.norm();

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += (f1 + f2) * WGK[j];
        res_abs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }

    let mean = kronrod * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).norm();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }

    let value = kronrod * half;
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::Quadrature {
            reason: format!("non-finite integrand on [{a}, {b}]"),
            value,
            error: f64::INFINITY,
        });
    }
    let error = rescale_error(
        ((kronrod - gauss) * half).norm(),
        res_abs * abs_half,
        res_asc * abs_half,
    );
    let floor = 50.0 * f64::EPSILON * res_abs * abs_half;
    Ok(Panel {
        a,
        b,
        value,
        error,
        floor,
    })
}

/// Adaptive integration over `[points[0], points[last]]`, starting from the
/// panels delimited by `points` (which must be strictly increasing).
pub fn integrate<F: FnMut(f64) -> Complex64>(
    mut f: F,
    points: &[f64],
    opts: &QuadOptions,
) -> Result<Integral> {
    if points.len() < 2 {
        return Ok(Integral {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
        });
    }

    let mut heap = BinaryHeap::with_capacity(points.len() * 2);
    let mut settled: Vec<Panel> = Vec::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(gk15(&mut f, w[0], w[1])?);
        }
    }

    let total = |heap: &BinaryHeap<Panel>, settled: &[Panel]| {
        let mut value = Complex64::new(0.0, 0.0);
        let mut error = 0.0;
        for p in heap.iter().chain(settled.iter()) {
            value += p.value;
            error += p.error;
        }
        (value, error)
    };

    let (mut value, mut error) = total(&heap, &settled);
    let mut intervals = heap.len();
    // Error parked on panels too narrow to split; round-off-limited panels
    // are parked too but are not counted here.
    let mut unresolved = 0.0;
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * value.norm());
        if error <= tol {
            break;
        }
        let Some(worst) = heap.pop() else {
            if unresolved <= tol {
                break;
            }
            return Err(Error::Quadrature {
                reason: "roundoff limit reached before tolerance".into(),
                value,
                error,
            });
        };
        if worst.error <= worst.floor * (1.0 + 1e-12) {
            settled.push(worst);
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let scale = worst.a.abs().max(worst.b.abs()).max(1.0);
        if worst.b - worst.a <= 1e-13 * scale || mid <= worst.a || mid >= worst.b {
            unresolved += worst.error;
            settled.push(worst);
            continue;
        }
        if intervals >= opts.max_intervals {
            return Err(Error::Quadrature {
                reason: format!("subdivision limit {} exceeded", opts.max_intervals),
                value,
                error,
            });
        }
        let left = gk15(&mut f, worst.a, mid)?;
        let right = gk15(&mut f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        intervals += 1;

        // Running sums drift; refresh them now and then.
        if intervals % 512 == 0 {
            (value, error) = total(&heap, &settled);
        }
    }

    let (value, error) = total(&heap, &settled);
    Ok(Integral { value, error })
}

/// Integral over `[start, inf)` through `E = start + scale * u / (1 - u)`.
pub fn integrate_semi_infinite<F: FnMut(f64) -> Complex64>(
    mut f: F,
    start: f64,
    scale: f64,
    initial_panels: usize,
    opts: &QuadOptions,
) -> Result<Integral> {
    let points = panel_points(0.0, 1.0, 1.0 / initial_panels.max(1) as f64, &[]);
    integrate(
        |u| {
            let v = 1.0 - u;
            f(start + scale * u / v) * (scale / (v * v))
        },
        &points,
        opts,
    )
}

/// Breakpoints on `[a, b]` such that no panel is wider than `max_width`, with
/// each entry of `features` (if inside) inserted as an extra breakpoint.
pub fn panel_points(a: f64, b: f64, max_width: f64, features: &[f64]) -> Vec<f64> {
    let n = if max_width > 0.0 && max_width.is_finite() {
        ((b - a) / max_width).ceil().max(1.0) as usize
    } else {
        1
    };
    let mut pts: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    pts.extend(features.iter().copied().filter(|&x| x > a && x < b));
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
    pts
}

/// Exponential integral E1(z) on the principal branch (cut along the
/// negative real axis).
pub fn exp_integral_e1(z: Complex64) -> Complex64 {
    if use_series(z) {
        e1_series(z)
    } else {
        e1_continued_fraction(z) * (-z).exp()
    }
}

/// `e^z E1(z)`, which stays representable where `E1` alone under- or
/// overflows.
pub fn exp_scaled_e1(z: Complex64) -> Complex64 {
    if use_series(z) {
        e1_series(z) * z.exp()
    } else {
        e1_continued_fraction(z)
    }
}

fn use_series(z: Complex64) -> bool {
    z.norm() < 2.0 || (z.re < 0.0 && z.im.abs() < 0.5 * z.norm())
}

fn e1_series(z: Complex64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut power = Complex64::new(1.0, 0.0);
    for n in 1..400 {
        power *= -z / n as f64;
        let term = power / n as f64;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum
}

fn e1_continued_fraction(z: Complex64) -> Complex64 {
    let tiny = 1e-300;
    let mut b = z + 1.0;
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..20_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = (d * an + b).inv();
        c = b + c.inv() * an;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h
}
