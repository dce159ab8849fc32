//! Taylor moments and Turán tables.

use serde_json::json;
use xilab_core::moments::{compute_moment_table, ladder_digits, turan_margin_report, MAX_K};
use xilab_core::{EstimatedValue, KernelDescriptor, Result};

use super::{invalid, Body};
use crate::config::RunConfig;
use crate::report::{CsvTable, Status};

pub fn moments(kernel: &KernelDescriptor, k_max: usize, cfg: &RunConfig) -> Result<Body> {
    if k_max > MAX_K {
        return Err(invalid(format!("kmax must be at most {MAX_K}")));
    }
    let digits = if cfg.digits_explicit {
        cfg.precision_digits
    } else {
        ladder_digits(k_max)
    };
    let table = compute_moment_table(kernel, k_max, Some(digits))?;
    let margins = turan_margin_report(&table);

    let mut csv = CsvTable::new(&[
        "k",
        "b",
        "b_bound",
        "gamma",
        "gamma_bound",
        "T",
        "T_bound",
        "E",
        "E_bound",
        "classical_agrees",
    ]);
    let cell = |v: Option<&EstimatedValue>| match v {
        Some(v) => [v.value.to_decimal(digits), v.abs_error_bound.to_decimal(6)],
        None => [String::new(), String::new()],
    };
    for r in &table.rows {
        let mut row = vec![r.k.to_string()];
        row.extend(cell(Some(&r.b)));
        row.extend(cell(Some(&r.gamma)));
        row.extend(cell(r.turan.as_ref()));
        row.extend(cell(r.double_turan.as_ref()));
        row.push(r.classical_agrees.map_or(String::new(), |a| a.to_string()));
        csv.rows.push(row);
    }

    let uncertified_t = table
        .rows
        .iter()
        .find(|r| r.turan.as_ref().is_some_and(|t| t.certified_sign().is_none()))
        .map(|r| r.k);
    let status = match uncertified_t {
        Some(k) => Status::Inconclusive {
            reason: format!("T_{k} not certified at {digits} digits"),
        },
        None => Status::Ok,
    };
    Ok(Body::new(
        &["taylor_moments", "turan_inequalities", "double_turan_inequalities", "classical_turan_form"],
        json!({ "summary": margins, "table": table }),
    )
    .bound("b", table.rows.iter().map(|r| &r.b))
    .bound("turan", table.rows.iter().filter_map(|r| r.turan.as_ref()))
    .bound("double_turan", table.rows.iter().filter_map(|r| r.double_turan.as_ref()))
    .csv(csv)
    .status(status))
}
