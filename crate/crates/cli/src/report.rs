//! JSON and CSV report emission.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;
use xilab_core::{Error, EstimatedValue};

use crate::config::{Format, RunConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// A required sign or margin could not be certified at this precision.
    Inconclusive { reason: String },
    /// A reproduction check did not match its reference.
    Failed { reason: String },
    Error { code: String, message: String },
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Inconclusive { .. } => 2,
            Status::Failed { .. } => 3,
            Status::Error { code, .. } if code == "invalid_input" || code == "unsupported_derivative_order" => 1,
            Status::Error { .. } => 2,
        }
    }

    pub fn from_error(e: &Error) -> Status {
        Status::Error {
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub subcommand: String,
    pub config: RunConfig,
    /// Names of the formulas and criteria the run exercises.
    pub formula_tags: Vec<&'static str>,
    pub results: Value,
    /// Named absolute error bounds summarizing `results`.
    pub error_bounds: BTreeMap<String, String>,
    pub status: Status,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Columns `axis, value, error_bound, lower, upper`.
    pub fn estimates(axis: &str, points: impl IntoIterator<Item = (f64, EstimatedValue)>, digits: u32) -> Self {
        let mut t = CsvTable::new(&[axis, "value", "error_bound", "lower", "upper"]);
        for (x, v) in points {
            t.rows.push(estimate_row(&fmt_f64(x), &v, digits));
        }
        t
    }

    pub fn render(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in std::iter::once(&self.header).chain(&self.rows) {
            w.write_record(r).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flushing to memory")).expect("UTF-8 fields")
    }
}

pub fn estimate_row(key: &str, v: &EstimatedValue, digits: u32) -> Vec<String> {
    let (lo, hi) = (&v.value - &v.abs_error_bound, &v.value + &v.abs_error_bound);
    vec![
        key.to_string(),
        v.value.to_decimal(digits),
        v.abs_error_bound.to_decimal(6),
        lo.to_decimal(digits),
        hi.to_decimal(digits),
    ]
}

/// Shortest round-trip rendering, which is deterministic.
pub fn fmt_f64(x: f64) -> String {
    let mut s = String::new();
    write!(s, "{x:?}").expect("write to string");
    s
}

/// The largest bound among `values`, rendered to 6 digits.
pub fn max_bound<'a>(values: impl IntoIterator<Item = &'a EstimatedValue>) -> String {
    values
        .into_iter()
        .map(|v| &v.abs_error_bound)
        .fold(None, |m: Option<&xilab_core::Real>, b| match m {
            Some(m) if m >= b => Some(m),
            _ => Some(b),
        })
        .map_or_else(|| "0".to_string(), |b| b.to_decimal(6))
}

pub struct Outcome {
    pub report: Report,
    pub csv: Option<CsvTable>,
}

impl Outcome {
    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Writes `<subcommand>.json` / `.csv` under the output directory, or
    /// prints to stdout when none is set.
    pub fn emit(&self, cfg: &RunConfig) -> anyhow::Result<()> {
        let stem = self.report.subcommand.replace(' ', "_");
        for f in &cfg.output_formats {
            let (ext, body) = match f {
                Format::Json => ("json", Some(self.json())),
                Format::Csv => ("csv", self.csv.as_ref().map(CsvTable::render)),
            };
            let Some(body) = body else { continue };
            match &cfg.output_dir {
                Some(dir) => write_file(&dir.join(format!("{stem}.{ext}")), &body)?,
                None => print!("{body}"),
            }
        }
        Ok(())
    }
}

fn write_file(path: &Path, body: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use xilab_core::Precision;

    #[test]
    fn estimate_rows_bracket_the_value() {
        let p = Precision::digits(30);
        let v = EstimatedValue::new(p.real(1.5), p.real(0.25)).unwrap();
        let t = CsvTable::estimates("x", [(0.5, v)], 10);
        assert_eq!(t.render(), "x,value,error_bound,lower,upper\n0.5,1.500000000e0,2.50000e-1,1.250000000e0,1.750000000e0\n");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Status::Ok.exit_code(), 0);
        assert_eq!(Status::Inconclusive { reason: String::new() }.exit_code(), 2);
        assert_eq!(Status::from_error(&Error::InvalidInput("x".into())).exit_code(), 1);
        assert_eq!(Status::from_error(&Error::PrecisionExhausted("x".into())).exit_code(), 2);
    }
}
