//! Tables and their CSV / JSON renderings.
//!
//! Column sets are fixed per subcommand and carry a schema tag; bump the
//! version in the tag whenever a header changes.

use serde_json::{json, Map, Value};

use crate::config::{ExperimentConfig, Format};

pub const POLES_SCHEMA: &str = "poles/v1";
pub const POLES_HEADER: &[&str] = &[
    "index",
    "k_re",
    "k_im",
    "e_r",
    "gamma",
    "lifetime",
    "jost_derivative_re",
    "jost_derivative_im",
];

pub const LINESHAPE_SCHEMA: &str = "lineshape/v1";
pub const LINESHAPE_HEADER: &[&str] = &[
    "e",
    "s_re",
    "s_im",
    "phase_shift",
    "sin2_delta",
    "spectral_density",
];

pub const SURVIVAL_SCHEMA: &str = "survival/v1";
pub const SURVIVAL_HEADER: &[&str] = &[
    "t",
    "survival_probability",
    "exponential_reference",
    "relative_deviation",
];

/// Followed by `term<i>_re, term<i>_im` for every swept pole.
pub const DECOMPOSE_SCHEMA: &str = "decompose/v1";
pub const DECOMPOSE_HEADER: &[&str] = &[
    "t",
    "direct_re",
    "direct_im",
    "background_re",
    "background_im",
];

pub const BW_COMPARE_SCHEMA: &str = "bw-compare/v1";
pub const BW_COMPARE_HEADER: &[&str] = &[
    "t",
    "extended_probability",
    "physical_probability",
    "exponential",
    "relative_deviation",
];

/// `t`, then `level<i>_modulus2` per level, then `total_intensity`.
pub const EFFECTIVE_SCHEMA: &str = "effective/v1";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: &'static str,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(schema: &'static str, columns: Vec<String>) -> Self {
        Self {
            schema,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn with_header(schema: &'static str, header: &[&str]) -> Self {
        Self::new(schema, header.iter().map(|s| s.to_string()).collect())
    }

    pub fn push_floats(&mut self, row: impl IntoIterator<Item = f64>) {
        self.push(row.into_iter().map(Cell::Float).collect());
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match r[j] {
                    Cell::Int(i) => i as f64,
                    Cell::Float(x) => x,
                })
                .collect(),
        )
    }

    pub fn render(&self, format: Format, command: &str, config: &ExperimentConfig) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(command, config),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(format_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, command: &str, config: &ExperimentConfig) -> String {
        let mut data = Map::new();
        for (j, name) in self.columns.iter().enumerate() {
            let col: Vec<Value> = self
                .rows
                .iter()
                .map(|r| match r[j] {
                    Cell::Int(i) => json!(i),
                    Cell::Float(x) => json!(x),
                })
                .collect();
            data.insert(name.clone(), Value::Array(col));
        }
        let doc = json!({
            "meta": {
                "tool": env!("CARGO_PKG_NAME"),
                "version": env!("CARGO_PKG_VERSION"),
                "command": command,
                "schema": self.schema,
                "columns": self.columns,
                "config": config,
            },
            "data": data,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }
}

fn format_cell(c: &Cell) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        Cell::Float(x) => format_float(*x),
    }
}

/// 17 significant digits, exponent with explicit sign and at least two
/// digits (`1.2345678901234567e-05`).
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let s = format!("{x:.16e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}
