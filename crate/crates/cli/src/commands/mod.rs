//! Subcommand implementations. Each returns a [`Body`]; numerical errors
//! become an error status in the report rather than a process failure.

mod assoc;
mod basic;
mod moments;
mod probe;
mod selftest;

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;
use xilab_core::{Error, EstimatedValue, Result};

use crate::cli::{Command, ProbeTarget};
use crate::config::RunConfig;
use crate::report::{max_bound, CsvTable, Outcome, Report, Status};

pub use selftest::{selftest_checks, SelfCheck};

pub struct Body {
    pub tags: Vec<&'static str>,
    pub results: Value,
    pub bounds: BTreeMap<String, String>,
    pub csv: Option<CsvTable>,
    pub status: Status,
}

impl Body {
    pub fn new(tags: &[&'static str], results: impl Serialize) -> Body {
        Body {
            tags: tags.to_vec(),
            results: to_value(results),
            bounds: BTreeMap::new(),
            csv: None,
            status: Status::Ok,
        }
    }

    pub fn bound<'a>(mut self, name: &str, values: impl IntoIterator<Item = &'a EstimatedValue>) -> Body {
        self.bounds.insert(name.to_string(), max_bound(values));
        self
    }

    pub fn csv(mut self, t: CsvTable) -> Body {
        self.csv = Some(t);
        self
    }

    pub fn status(mut self, s: Status) -> Body {
        self.status = s;
        self
    }

    /// Inconclusive unless `ok`.
    pub fn require(self, ok: bool, reason: impl FnOnce() -> String) -> Body {
        if ok || self.status != Status::Ok {
            self
        } else {
            self.status(Status::Inconclusive { reason: reason() })
        }
    }
}

pub fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

pub fn dispatch(cmd: &Command, cfg: &RunConfig) -> Outcome {
    let body = match cmd {
        Command::Theta { t, order, range, grid } => basic::theta(*t, *order, *range, *grid, cfg),
        Command::Transform { spec, x, range, grid, order } => basic::transform(spec, *x, *range, *grid, *order, cfg),
        Command::Zeros { spec, range, grid } => basic::zeros(spec, *range, *grid, cfg),
        Command::Laguerre { kernel, n, range, grid, route } => basic::laguerre(kernel, *n, *range, *grid, *route, cfg),
        Command::Assoc { target, t_range, grid } => assoc::assoc(target, *t_range, *grid, cfg),
        Command::Pd { kernel, n, shifted_m, method, xmax, grid, points, spacing } => {
            assoc::pd(kernel, *n, *shifted_m, *method, *xmax, *grid, *points, *spacing, cfg)
        }
        Command::Moments { kernel, kmax } => moments::moments(kernel, *kmax, cfg),
        Command::Example312 => assoc::example312(cfg),
        Command::Selftest => selftest::selftest(cfg),
        Command::Probe { target } => match target {
            ProbeTarget::Open47 { range, grid } => probe::open47(*range, *grid, cfg),
            ProbeTarget::Open413 { n_max, range, grid } => probe::open413(*n_max, *range, *grid, cfg),
            ProbeTarget::Open414 { range, grid } => probe::open414(*range, *grid, cfg),
            ProbeTarget::Open410 { lambda, n_max, xmax, grid } => probe::open410(*lambda, *n_max, *xmax, *grid, cfg),
            ProbeTarget::Open411 { lambda, m, method, xmax, grid } => {
                probe::open411(*lambda, *m, *method, *xmax, *grid, cfg)
            }
            ProbeTarget::Heatflow { lambda, range, grid, check_lambda, check_x } => {
                probe::heatflow(*lambda, *range, *grid, *check_lambda, check_x, cfg)
            }
        },
    };
    let body = body.unwrap_or_else(|e: Error| Body {
        tags: Vec::new(),
        results: Value::Null,
        bounds: BTreeMap::new(),
        csv: None,
        status: Status::from_error(&e),
    });
    Outcome {
        report: Report {
            subcommand: cmd.name(),
            config: cfg.clone(),
            formula_tags: body.tags,
            results: body.results,
            error_bounds: body.bounds,
            status: body.status,
        },
        csv: body.csv,
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn grid_or_point(x: Option<f64>, range: Option<(f64, f64)>, n: usize, axis: &str) -> Result<Vec<f64>> {
    match (x, range) {
        (Some(x), None) => Ok(vec![x]),
        (None, Some((a, b))) if n >= 2 => Ok(xilab_core::theta::closed_grid(a, b, n)),
        (None, Some(_)) => Err(invalid("grid needs at least 2 points")),
        _ => Err(invalid(format!("give exactly one of --{axis} and --range"))),
    }
}
