//! Kernel, transform, zero and Laguerre subcommands.

use rayon::prelude::*;
use serde_json::json;
use xilab_core::laguerre::{laguerre_profile, TransformSource};
use xilab_core::theta::theta_eval;
use xilab_core::transform::{real_zero_scan, transform_grid};
use xilab_core::{assoc_pd, EstimatedValue, KernelDescriptor, Result, TransformSpec};

use super::{grid_or_point, invalid, Body};
use crate::cli::{RouteArg, SpecArgs};
use crate::config::RunConfig;
use crate::report::{fmt_f64, CsvTable};

pub fn theta(t: Option<f64>, order: usize, range: Option<(f64, f64)>, n: usize, cfg: &RunConfig) -> Result<Body> {
    let grid = grid_or_point(t, range, n, "t")?;
    let p = cfg.quadrature().precision;
    let values = grid
        .par_iter()
        .map(|&t| theta_eval(&p.real(t), order))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<_> = grid.iter().copied().zip(values.iter().cloned()).collect();
    Ok(Body::new(
        &["theta_series", "theta_tail_bound"],
        json!({ "order": order, "points": points_json(&points, "t") }),
    )
    .bound("max_abs_error_bound", &values)
    .csv(CsvTable::estimates("t", points, cfg.precision_digits)))
}

pub fn spec_of(a: &SpecArgs) -> Result<TransformSpec> {
    let s = TransformSpec::new(a.kernel.clone()).with_lambda(a.lambda).with_extra_power(a.m);
    s.validate()?;
    Ok(s)
}

fn spec_tags(spec: &TransformSpec) -> Vec<&'static str> {
    let mut tags = vec!["cosine_transform"];
    if spec.heat_lambda != 0.0 {
        tags.push("heat_flow_deformation");
    }
    tags
}

pub fn transform(
    a: &SpecArgs,
    x: Option<f64>,
    range: Option<(f64, f64)>,
    n: usize,
    order: usize,
    cfg: &RunConfig,
) -> Result<Body> {
    let spec = spec_of(a)?;
    let grid = grid_or_point(x, range, n, "x")?;
    let values = transform_grid(&spec, &grid, order, &cfg.quadrature())?;
    let points: Vec<_> = grid.iter().copied().zip(values.iter().cloned()).collect();
    let mut body = Body::new(&[], json!({ "spec": spec.to_string(), "order": order, "points": points_json(&points, "x") }))
        .bound("max_abs_error_bound", &values)
        .csv(CsvTable::estimates("x", points, cfg.precision_digits));
    body.tags = spec_tags(&spec);
    Ok(body)
}

pub fn zeros(a: &SpecArgs, range: (f64, f64), n: usize, cfg: &RunConfig) -> Result<Body> {
    let spec = spec_of(a)?;
    let report = real_zero_scan(&spec, range, n, &cfg.quadrature())?;
    let mut csv = CsvTable::new(&["x", "derivative", "derivative_bound", "simple", "bracket_lo", "bracket_hi"]);
    for z in &report.zeros {
        let (d, db) = z.derivative.unwrap_or((f64::NAN, f64::NAN));
        csv.rows.push(vec![
            fmt_f64(z.refined),
            fmt_f64(d),
            fmt_f64(db),
            z.simple.to_string(),
            fmt_f64(z.bracket.0),
            fmt_f64(z.bracket.1),
        ]);
    }
    let mut body = Body::new(&[], json!({ "spec": spec.to_string(), "zero_report": report })).csv(csv);
    body.tags = spec_tags(&spec);
    body.tags.push("real_zero_scan");
    Ok(body)
}

pub fn laguerre(
    kernel: &KernelDescriptor,
    n: usize,
    (a, b): (f64, f64),
    m: usize,
    route: RouteArg,
    cfg: &RunConfig,
) -> Result<Body> {
    if m < 2 {
        return Err(invalid("grid needs at least 2 points"));
    }
    let grid = xilab_core::theta::closed_grid(a, b, m);
    let q = cfg.quadrature();
    let (profile, tags) = match route {
        RouteArg::Deriv => {
            let src = TransformSource::new(TransformSpec::new(kernel.clone()), q);
            (laguerre_profile(&src, n, &grid)?, vec!["generalized_laguerre_expression"])
        }
        RouteArg::Kernel => {
            let n = u32::try_from(n).map_err(|_| invalid("n too large"))?;
            (
                assoc_pd::laguerre_profile_kernel(kernel, n, &grid, &q)?,
                vec!["generalized_laguerre_expression", "associated_kernel_transform_identity"],
            )
        }
    };
    let points: Vec<_> = grid.iter().copied().zip(profile.values.iter().cloned()).collect();
    let mut body = Body::new(
        &[],
        json!({
            "source": profile.source,
            "n": profile.n,
            "route": profile.route,
            "min_value": profile.min_value,
            "argmin": profile.argmin,
            "all_certified_positive": profile.all_certified_positive,
            "points": points_json(&points, "x"),
        }),
    )
    .bound("max_abs_error_bound", &profile.values)
    .csv(CsvTable::estimates("x", points, cfg.precision_digits));
    body.tags = tags;
    Ok(body)
}

pub fn points_json(points: &[(f64, EstimatedValue)], axis: &str) -> serde_json::Value {
    points
        .iter()
        .map(|(x, v)| json!({ axis: x, "value": v.value, "abs_error_bound": v.abs_error_bound.to_decimal(6) }))
        .collect()
}
