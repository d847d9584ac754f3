//! Experiment configuration: one TOML file, every section optional.

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub lambda: f64,
    pub a: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            lambda: 10.0,
            a: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub grid_density: f64,
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self {
            re_min: 0.5,
            re_max: 10.0,
            im_min: -2.0,
            im_max: 0.0,
            grid_density: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumeratorPole {
    pub re: f64,
    pub im: f64,
    pub power: u32,
}

/// `N(E) = scale * prod (E - zero) / prod (E - pole)^power`, normalized
/// before use so `scale` only fixes the phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    #[serde(default = "unit")]
    pub scale: ComplexValue,
    #[serde(default)]
    pub zeros: Vec<ComplexValue>,
    pub poles: Vec<NumeratorPole>,
}

fn unit() -> ComplexValue {
    ComplexValue { re: 1.0, im: 0.0 }
}

impl Default for StateConfig {
    fn default() -> Self {
        Self {
            scale: unit(),
            zeros: Vec::new(),
            poles: vec![NumeratorPole {
                re: 8.0,
                im: 6.0,
                power: 3,
            }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourConfig {
    pub theta: f64,
    pub radial_cutoff: f64,
    pub node_count: usize,
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self {
            theta: FRAC_PI_4,
            radial_cutoff: 10.5,
            node_count: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_min: 0.0,
            t_max: 6.5,
            n_points: 20,
        }
    }
}

impl TimeGrid {
    pub fn points(&self) -> Vec<f64> {
        linspace(self.t_min, self.t_max, self.n_points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyGrid {
    pub e_min: f64,
    pub e_max: f64,
    pub n_points: usize,
}

impl Default for EnergyGrid {
    fn default() -> Self {
        Self {
            e_min: 0.1,
            e_max: 50.0,
            n_points: 200,
        }
    }
}

impl EnergyGrid {
    pub fn points(&self) -> Vec<f64> {
        linspace(self.e_min, self.e_max, self.n_points)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub pole_tol: f64,
    pub quad_tol: f64,
    pub recon_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            pole_tol: 1e-12,
            quad_tol: 1e-12,
            recon_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: String,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            path: "-".into(),
            format: Format::Csv,
        }
    }
}

/// An idealized Breit-Wigner level for `bw-compare`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceConfig {
    pub e_r: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelConfig {
    pub re: f64,
    pub im: f64,
    #[serde(default = "unit")]
    pub coefficient: ComplexValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// Levels for `effective`, either listed or read from a `poles` table.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveConfig {
    #[serde(default)]
    pub levels: Vec<LevelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poles_csv: Option<String>,
    /// Initial coefficients for levels read from `poles_csv`; missing
    /// entries default to 1.
    #[serde(default)]
    pub coefficients: Vec<ComplexValue>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub region: RegionConfig,
    #[serde(default)]
    pub state: StateConfig,
    #[serde(default)]
    pub contour: ContourConfig,
    #[serde(default)]
    pub time_grid: TimeGrid,
    #[serde(default)]
    pub energy_grid: EnergyGrid,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonance: Option<ResonanceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effective: Option<EffectiveConfig>,
}

/// Which half-line of times the experiment lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeDirection {
    Forward,
    Backward,
}

/// One violated invariant, addressed by its dotted field path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = match e.span() {
                Some(span) => line_column(text, span.start),
                None => (0, 0),
            };
            CliError::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    /// Every violated invariant for forward-in-time experiments.
    pub fn validate(&self) -> Vec<Violation> {
        self.validate_for(TimeDirection::Forward)
    }

    pub fn validate_for(&self, direction: TimeDirection) -> Vec<Violation> {
        let mut v = Checker::default();

        v.finite("model.lambda", self.model.lambda);
        v.positive("model.a", self.model.a);

        let r = &self.region;
        v.finite("region.re_min", r.re_min);
        v.finite("region.re_max", r.re_max);
        v.finite("region.im_min", r.im_min);
        v.finite("region.im_max", r.im_max);
        v.check(
            "region.re_max",
            r.re_max > r.re_min,
            "must exceed region.re_min",
        );
        v.check(
            "region.im_max",
            r.im_max > r.im_min,
            "must exceed region.im_min",
        );
        v.check(
            "region.im_max",
            r.im_max <= 0.0,
            "resonance search must stay in the lower half-plane (im_max <= 0)",
        );
        v.positive("region.grid_density", r.grid_density);

        let s = &self.state;
        v.check(
            "state.scale",
            s.scale.re.is_finite()
                && s.scale.im.is_finite()
                && (s.scale.re != 0.0 || s.scale.im != 0.0),
            "must be finite and nonzero",
        );
        for (i, z) in s.zeros.iter().enumerate() {
            v.check(
                &format!("state.zeros[{i}]"),
                z.re.is_finite() && z.im.is_finite(),
                "must be finite",
            );
        }
        for (i, p) in s.poles.iter().enumerate() {
            v.finite(&format!("state.poles[{i}].re"), p.re);
            v.check(
                &format!("state.poles[{i}].im"),
                p.im > 0.0 && p.im.is_finite(),
                "must be positive (upper half-plane)",
            );
            v.check(
                &format!("state.poles[{i}].power"),
                p.power >= 1,
                "must be at least 1",
            );
        }
        let order: i64 =
            s.poles.iter().map(|p| i64::from(p.power)).sum::<i64>() - s.zeros.len() as i64;
        v.check(
            "state.poles",
            order >= 2,
            "total pole power must exceed the number of zeros by at least 2",
        );

        let c = &self.contour;
        v.check(
            "contour.theta",
            c.theta > 0.0 && c.theta <= FRAC_PI_4,
            "must lie in the interval (0, pi/4]",
        );
        v.positive("contour.radial_cutoff", c.radial_cutoff);
        v.check(
            "contour.node_count",
            c.node_count >= 1,
            "must be at least 1",
        );

        let t = &self.time_grid;
        v.finite("time_grid.t_min", t.t_min);
        v.finite("time_grid.t_max", t.t_max);
        v.check(
            "time_grid.n_points",
            t.n_points >= 1,
            "grid must not be empty",
        );
        v.check(
            "time_grid.t_max",
            t.t_max >= t.t_min,
            "must not be below time_grid.t_min",
        );
        match direction {
            TimeDirection::Forward => {
                v.check(
                    "time_grid.t_min",
                    t.t_min >= 0.0,
                    "decaying states evolve only for t >= 0",
                );
            }
            TimeDirection::Backward => {
                v.check(
                    "time_grid.t_max",
                    t.t_max <= 0.0,
                    "growing states evolve only for t <= 0",
                );
            }
        }

        let e = &self.energy_grid;
        v.check(
            "energy_grid.e_min",
            e.e_min >= 0.0 && e.e_min.is_finite(),
            "must be finite and non-negative",
        );
        v.finite("energy_grid.e_max", e.e_max);
        v.check(
            "energy_grid.e_max",
            e.e_max >= e.e_min,
            "must not be below energy_grid.e_min",
        );
        v.check(
            "energy_grid.n_points",
            e.n_points >= 1,
            "grid must not be empty",
        );

        let tol = &self.tolerances;
        v.positive("tolerances.pole_tol", tol.pole_tol);
        v.positive("tolerances.quad_tol", tol.quad_tol);
        v.positive("tolerances.recon_tol", tol.recon_tol);

        v.check(
            "output.path",
            !self.output.path.is_empty(),
            "must not be empty",
        );

        if let Some(res) = &self.resonance {
            v.finite("resonance.e_r", res.e_r);
            v.positive("resonance.gamma", res.gamma);
        }

        if let Some(eff) = &self.effective {
            for (i, l) in eff.levels.iter().enumerate() {
                v.finite(&format!("effective.levels[{i}].re"), l.re);
                v.check(
                    &format!("effective.levels[{i}].im"),
                    l.im < 0.0 && l.im.is_finite(),
                    "level energies need Im z < 0",
                );
                v.check(
                    &format!("effective.levels[{i}].coefficient"),
                    l.coefficient.re.is_finite() && l.coefficient.im.is_finite(),
                    "must be finite",
                );
            }
            v.check(
                "effective",
                eff.levels.is_empty() != eff.poles_csv.is_none(),
                "give exactly one of levels or poles_csv",
            );
        }

        v.violations
    }
}

#[derive(Default)]
struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn check(&mut self, field: &str, ok: bool, message: &str) {
        if !ok {
            self.violations.push(Violation {
                field: field.to_string(),
                message: message.to_string(),
            });
        }
    }

    fn finite(&mut self, field: &str, x: f64) {
        self.check(field, x.is_finite(), "must be finite");
    }

    fn positive(&mut self, field: &str, x: f64) {
        self.check(
            field,
            x > 0.0 && x.is_finite(),
            "must be positive and finite",
        );
    }
}

// 1-based line and column of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}
