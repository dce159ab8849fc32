//! Probes of open questions. Outcomes are recorded; only the desk-scale
//! Laguerre probe and the heat-flow checks carry a required margin.

use serde_json::json;
use xilab_core::assoc_pd::{pd_check_gram, pd_check_transform, CosineTarget};
use xilab_core::kernels::KernelFamily;
use xilab_core::laguerre::{laguerre_profile, TransformSource};
use xilab_core::theta::{closed_grid, derivative_log_concavity_probe, open_4_14_probe};
use xilab_core::transform::{heat_equation_check, real_zero_scan};
use xilab_core::{AssocKernel, KernelDescriptor, Result, TransformSpec};

use super::{invalid, to_value, Body};
use crate::cli::PdMethodArg;
use crate::config::RunConfig;
use crate::report::{estimate_row, fmt_f64, CsvTable, Status};

/// Residual tolerance of the backward heat equation check.
pub const HEAT_RESIDUAL_TOL: f64 = 1e-6;

pub fn open47((a, b): (f64, f64), n: usize, cfg: &RunConfig) -> Result<Body> {
    if n < 2 {
        return Err(invalid("grid needs at least 2 points"));
    }
    let grid = closed_grid(a, b, n);
    let src = TransformSource::new(TransformSpec::new(KernelDescriptor::theta()), cfg.quadrature());
    let profile = laguerre_profile(&src, 1, &grid)?;
    let points: Vec<_> = grid.iter().copied().zip(profile.values.iter().cloned()).collect();
    let ok = profile.all_certified_positive;
    let uncertified = profile.values.iter().zip(&grid).find(|(v, _)| !v.certified_positive()).map(|(_, x)| *x);
    Ok(Body::new(
        &["laguerre_inequality_xi", "generalized_laguerre_expression"],
        json!({
            "source": profile.source,
            "range": [a, b],
            "grid": n,
            "min_value": profile.min_value,
            "argmin": profile.argmin,
            "all_certified_positive": ok,
        }),
    )
    .bound("max_abs_error_bound", &profile.values)
    .csv(CsvTable::estimates("x", points, cfg.precision_digits))
    .require(ok, || format!("L_1 not certified positive at x = {}", uncertified.unwrap_or(f64::NAN))))
}

pub fn open413(n_max: usize, range: (f64, f64), n: usize, cfg: &RunConfig) -> Result<Body> {
    let p = cfg.quadrature().precision;
    let probes = derivative_log_concavity_probe(n_max, range, n, p)?;
    let mut csv = CsvTable::new(&["n", "t", "value", "error_bound", "lower", "upper"]);
    let mut summary = Vec::new();
    for (i, pr) in probes.iter().enumerate() {
        for pt in &pr.points {
            let mut row = vec![(i + 1).to_string()];
            row.extend(estimate_row(&fmt_f64(pt.t), &pt.value, cfg.precision_digits));
            csv.rows.push(row);
        }
        summary.push(json!({
            "n": i + 1,
            "label": pr.label,
            "all_positive": pr.all_positive,
            "negative_found": pr.negative_found,
            "worst_t": pr.worst_t,
            "worst_value": pr.worst_value,
        }));
    }
    Ok(Body::new(
        &["theta_derivative_log_concavity"],
        json!({ "range": [range.0, range.1], "grid": n, "probes": summary }),
    )
    .bound("max_abs_error_bound", probes.iter().flat_map(|p| p.points.iter().map(|q| &q.value)))
    .csv(csv))
}

pub fn open414(range: (f64, f64), n: usize, cfg: &RunConfig) -> Result<Body> {
    let p = cfg.quadrature().precision;
    let r = open_4_14_probe(range, n, p)?;
    let points: Vec<_> = r.points.iter().map(|q| (q.t, q.value.clone())).collect();
    Ok(Body::new(
        &["double_turan_log_concavity", "sqrt_argument_theta"],
        json!({
            "interval": [r.interval.0, r.interval.1],
            "f_positive": r.f_positive,
            "min": r.min,
            "max": r.max,
            "all_negative": r.all_negative,
        }),
    )
    .bound("max_abs_error_bound", r.points.iter().map(|q| &q.value))
    .csv(CsvTable::estimates("t", points, cfg.precision_digits)))
}

fn theta_lambda(lambda: f64) -> Result<KernelDescriptor> {
    KernelDescriptor::new(KernelFamily::ModifiedTheta { lambda, m: 0 })
}

pub fn open410(lambda: f64, n_max: u32, xmax: f64, n: usize, cfg: &RunConfig) -> Result<Body> {
    if !(lambda < 0.0) {
        return Err(invalid(format!("this probe concerns lambda < 0, got {lambda}")));
    }
    let phi = theta_lambda(lambda)?;
    let reports = (0..=n_max)
        .map(|j| pd_check_transform(&AssocKernel::new(phi.clone(), j, cfg.quadrature()), xmax, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(Body::new(
        &["associated_kernel", "bochner_transform_criterion", "theta_gaussian_factor"],
        json!({ "lambda": lambda, "reports": reports }),
    ))
}

pub fn open411(lambda: f64, m: u32, method: PdMethodArg, xmax: f64, n: usize, cfg: &RunConfig) -> Result<Body> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("this probe concerns lambda > 0, got {lambda}")));
    }
    let k = AssocKernel::shifted(theta_lambda(lambda)?, m, cfg.quadrature());
    let results = match method {
        PdMethodArg::Transform => to_value(pd_check_transform(&k, xmax, n)?),
        PdMethodArg::Gram => {
            let h = std::f64::consts::PI / xmax;
            let pts: Vec<f64> = (0..n.min(200)).map(|j| j as f64 * h).collect();
            to_value(pd_check_gram(&k.label(), |t| Ok(k.kernel_value(t)?.value_f64()), &pts)?)
        }
        PdMethodArg::Sine => return Err(invalid("method must be transform or gram")),
    };
    Ok(Body::new(
        &["associated_kernel", "shifted_weight", "theta_gaussian_factor"],
        json!({ "lambda": lambda, "m": m, "report": results }),
    ))
}

pub fn heatflow(
    lambda: f64,
    range: (f64, f64),
    n: usize,
    check_lambda: f64,
    check_x: &[f64],
    cfg: &RunConfig,
) -> Result<Body> {
    let q = cfg.quadrature();
    let spec = TransformSpec::new(KernelDescriptor::theta()).with_lambda(lambda);
    let zeros = real_zero_scan(&spec, range, n, &q)?;
    let base = TransformSpec::new(KernelDescriptor::theta());
    let checks = check_x
        .iter()
        .map(|&x| heat_equation_check(&base, check_lambda, x, &q))
        .collect::<Result<Vec<_>>>()?;
    let mut csv = CsvTable::new(&["x", "simple", "derivative", "derivative_bound"]);
    for z in &zeros.zeros {
        let (d, db) = z.derivative.unwrap_or((f64::NAN, f64::NAN));
        csv.rows.push(vec![fmt_f64(z.refined), z.simple.to_string(), fmt_f64(d), fmt_f64(db)]);
    }
    let residuals_ok = checks.iter().all(|c| c.relative_residual <= HEAT_RESIDUAL_TOL);
    let all_simple = zeros.zeros.iter().all(|z| z.simple);
    let status = if !residuals_ok {
        Status::Failed {
            reason: format!("heat equation residual above {HEAT_RESIDUAL_TOL:e}"),
        }
    } else if !all_simple {
        Status::Inconclusive {
            reason: "a located zero is not certified simple".into(),
        }
    } else {
        Status::Ok
    };
    Ok(Body::new(
        &["heat_flow_deformation", "backward_heat_equation", "real_zero_scan"],
        json!({
            "lambda": lambda,
            "zero_report": zeros,
            "all_zeros_simple": all_simple,
            "heat_checks": checks,
            "residual_tolerance": HEAT_RESIDUAL_TOL,
        }),
    )
    .csv(csv)
    .status(status))
}
