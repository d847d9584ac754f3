//! One function per subcommand, each turning a validated config into a table.

use std::fs;

use clap::ValueEnum;
use resonance_core::effective_theory::{intensity, EffectiveModel, Level};
use resonance_core::gamow_states::{bw_survival, GamowKind, GamowState, LowerCutoff};
use resonance_core::pole_finder::{scan_poles, ResonancePole, SearchRegion};
use resonance_core::scattering_model::{jost_function, s_matrix, DeltaShellModel};
use resonance_core::spectral_decomposition::{
    direct_survival, PreparedState, RationalNumerator, RotatedContour, SpectralDecomposer,
};
use resonance_core::{Complex64, Error};

use crate::config::{ComplexValue, ExperimentConfig, TimeDirection, Violation};
use crate::error::CliError;
use crate::output::{
    Cell, Table, BW_COMPARE_HEADER, BW_COMPARE_SCHEMA, DECOMPOSE_HEADER, DECOMPOSE_SCHEMA,
    EFFECTIVE_SCHEMA, LINESHAPE_HEADER, LINESHAPE_SCHEMA, POLES_HEADER, POLES_SCHEMA,
    SURVIVAL_HEADER, SURVIVAL_SCHEMA,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Poles,
    Lineshape,
    Survival,
    Decompose,
    BwCompare,
    Effective,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Poles => "poles",
            Command::Lineshape => "lineshape",
            Command::Survival => "survival",
            Command::Decompose => "decompose",
            Command::BwCompare => "bw-compare",
            Command::Effective => "effective",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Kind {
    #[default]
    Decaying,
    Growing,
}

/// Validates `config` for `command` and runs it.
pub fn run(command: Command, config: &ExperimentConfig, kind: Kind) -> Result<Table, CliError> {
    let direction = match kind {
        Kind::Decaying => TimeDirection::Forward,
        Kind::Growing => TimeDirection::Backward,
    };
    let mut violations = config.validate_for(direction);
    if kind == Kind::Growing && command != Command::Effective {
        violations.push(Violation {
            field: "kind".into(),
            message: format!(
                "growing states are only available for `effective`, not `{}`",
                command.name()
            ),
        });
    }
    if command == Command::Effective && config.effective.is_none() {
        violations.push(Violation {
            field: "effective".into(),
            message: "section is required for `effective`".into(),
        });
    }
    if !violations.is_empty() {
        return Err(CliError::Validation(violations));
    }

    match command {
        Command::Poles => poles(config),
        Command::Lineshape => lineshape(config),
        Command::Survival => survival(config),
        Command::Decompose => decompose(config),
        Command::BwCompare => bw_compare(config),
        Command::Effective => effective(config, kind),
    }
}

fn model(config: &ExperimentConfig) -> Result<DeltaShellModel, Error> {
    DeltaShellModel::new(config.model.lambda, config.model.a)
}

fn complex(c: &ComplexValue) -> Complex64 {
    Complex64::new(c.re, c.im)
}

fn region_poles(config: &ExperimentConfig) -> Result<Vec<ResonancePole>, Error> {
    let r = &config.region;
    let region = SearchRegion::new(r.re_min, r.re_max, r.im_min, r.im_max, r.grid_density)?;
    scan_poles(&model(config)?, &region, config.tolerances.pole_tol)
}

fn state(config: &ExperimentConfig) -> Result<PreparedState, Error> {
    let s = &config.state;
    let numerator = RationalNumerator::new(
        complex(&s.scale),
        s.zeros.iter().map(complex).collect(),
        s.poles
            .iter()
            .map(|p| (Complex64::new(p.re, p.im), p.power))
            .collect(),
    )?;
    PreparedState::with_tolerance(model(config)?, numerator, config.tolerances.quad_tol)
}

fn decomposer(config: &ExperimentConfig) -> Result<SpectralDecomposer, Error> {
    let c = &config.contour;
    let contour = RotatedContour::new(c.theta, c.radial_cutoff, c.node_count)?;
    let poles = scan_poles(
        &model(config)?,
        &contour.sweep_region(config.region.grid_density)?,
        config.tolerances.pole_tol,
    )?;
    SpectralDecomposer::new(&state(config)?, &poles, &contour)
}

fn poles(config: &ExperimentConfig) -> Result<Table, CliError> {
    let mut table = Table::with_header(POLES_SCHEMA, POLES_HEADER);
    for (i, p) in region_poles(config)?.iter().enumerate() {
        let k = p.momentum();
        let d = p.jost_derivative();
        let mut row = vec![Cell::Int(i as i64)];
        row.extend(
            [
                k.re,
                k.im,
                p.resonance_energy(),
                p.width(),
                1.0 / p.width(),
                d.re,
                d.im,
            ]
            .into_iter()
            .map(Cell::Float),
        );
        table.push(row);
    }
    Ok(table)
}

fn lineshape(config: &ExperimentConfig) -> Result<Table, CliError> {
    let m = model(config)?;
    let st = state(config)?;
    let mut table = Table::with_header(LINESHAPE_SCHEMA, LINESHAPE_HEADER);
    for e in config.energy_grid.points() {
        let k = Complex64::new(e.sqrt(), 0.0);
        let s = s_matrix(&m, k)?;
        // S = conj(F) / F on the real axis, so delta = -arg F.
        let delta = -jost_function(&m, k)?.arg();
        table.push_floats([
            e,
            s.re,
            s.im,
            delta,
            delta.sin().powi(2),
            st.spectral_density(e)?,
        ]);
    }
    Ok(table)
}

fn narrowest(dec: &SpectralDecomposer) -> Result<(ResonancePole, Complex64), Error> {
    dec.coefficients()
        .min_by(|a, b| a.1.width().total_cmp(&b.1.width()))
        .map(|(_, p, c)| (*p, c))
        .ok_or_else(|| Error::Domain("the contour sweeps no resonance pole".into()))
}

fn survival(config: &ExperimentConfig) -> Result<Table, CliError> {
    let dec = decomposer(config)?;
    let (pole, coef) = narrowest(&dec)?;
    let mut table = Table::with_header(SURVIVAL_SCHEMA, SURVIVAL_HEADER);
    for t in config.time_grid.points() {
        let p = direct_survival(dec.state(), t)?.norm_sqr();
        let reference = coef.norm_sqr() * (-pole.width() * t).exp();
        table.push_floats([t, p, reference, (p - reference).abs() / reference]);
    }
    Ok(table)
}

fn decompose(config: &ExperimentConfig) -> Result<Table, CliError> {
    let dec = decomposer(config)?;
    let mut columns: Vec<String> = DECOMPOSE_HEADER.iter().map(|s| s.to_string()).collect();
    for (i, _, _) in dec.coefficients() {
        columns.push(format!("term{i}_re"));
        columns.push(format!("term{i}_im"));
    }
    let mut table = Table::new(DECOMPOSE_SCHEMA, columns);
    for t in config.time_grid.points() {
        let d = dec.at(t, config.tolerances.recon_tol)?;
        let mut row = vec![
            t,
            d.direct.re,
            d.direct.im,
            d.background.re,
            d.background.im,
        ];
        for term in &d.pole_terms {
            row.push(term.value.re);
            row.push(term.value.im);
        }
        table.push_floats(row);
    }
    Ok(table)
}

fn bw_compare(config: &ExperimentConfig) -> Result<Table, CliError> {
    let level = match &config.resonance {
        Some(r) => GamowState::new(r.e_r, r.gamma, GamowKind::Decaying)?,
        None => {
            let poles = region_poles(config)?;
            let p = poles
                .iter()
                .min_by(|a, b| a.width().total_cmp(&b.width()))
                .ok_or_else(|| Error::Domain("no resonance in the search region".into()))?;
            GamowState::from_pole(p)
        }
    };
    let mut table = Table::with_header(BW_COMPARE_SCHEMA, BW_COMPARE_HEADER);
    for t in config.time_grid.points() {
        let ext = bw_survival(&level, t, LowerCutoff::Extended)?.norm_sqr();
        let phys = bw_survival(&level, t, LowerCutoff::Physical)?.norm_sqr();
        let exp = (-level.width() * t).exp();
        table.push_floats([t, ext, phys, exp, (phys - exp).abs() / exp]);
    }
    Ok(table)
}

fn effective(config: &ExperimentConfig, kind: Kind) -> Result<Table, CliError> {
    let eff = config.effective.as_ref().expect("checked in run");
    let mut levels: Vec<Level> = match &eff.poles_csv {
        Some(path) => levels_from_poles_csv(path, &eff.coefficients)?,
        None => eff
            .levels
            .iter()
            .map(|l| Level {
                energy: Complex64::new(l.re, l.im),
                coefficient: complex(&l.coefficient),
                label: l.label.clone(),
            })
            .collect(),
    };
    let gamow_kind = match kind {
        Kind::Decaying => GamowKind::Decaying,
        Kind::Growing => {
            for l in &mut levels {
                l.energy = l.energy.conj();
            }
            GamowKind::Growing
        }
    };
    let m = EffectiveModel::with_kind(levels, gamow_kind)?;

    let mut columns = vec!["t".to_string()];
    columns.extend((0..m.levels().len()).map(|i| format!("level{i}_modulus2")));
    columns.push("total_intensity".into());
    let mut table = Table::new(EFFECTIVE_SCHEMA, columns);
    for t in config.time_grid.points() {
        let mut row = vec![t];
        let evolved = m.evolved(t)?;
        row.extend(evolved.levels().iter().map(|l| l.coefficient.norm_sqr()));
        row.push(intensity(&m, t)?);
        table.push_floats(row);
    }
    Ok(table)
}

/// Levels `z = E_R - i Gamma / 2` from a table written by `poles`.
fn levels_from_poles_csv(
    path: &str,
    coefficients: &[ComplexValue],
) -> Result<Vec<Level>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |message: String| CliError::Io {
        path: path.to_string(),
        message,
    };
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| bad(format!("missing column `{name}`")))
    };
    let (je, jg) = (col("e_r")?, col("gamma")?);
    let mut levels = Vec::new();
    for (n, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        let field = |j: usize| -> Result<f64, CliError> {
            cells
                .get(j)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| bad(format!("row {} has no number in column {j}", n + 2)))
        };
        let coefficient = coefficients
            .get(n)
            .map_or(Complex64::new(1.0, 0.0), complex);
        levels.push(Level {
            energy: Complex64::new(field(je)?, -0.5 * field(jg)?),
            coefficient,
            label: Some(format!("pole{n}")),
        });
    }
    if levels.is_empty() {
        return Err(bad("pole table has no rows".into()));
    }
    Ok(levels)
}
