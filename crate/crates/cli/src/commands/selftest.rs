//! Fast invariant suite. The report contains no timings, so repeated runs
//! with the same configuration are byte-identical.

use serde::Serialize;
use serde_json::json;
use xilab_core::assoc_pd::{laguerre_kernel_route, pd_check_transform, sine_criterion};
use xilab_core::kernels::kernel_eval;
use xilab_core::laguerre::{laguerre_ln, perturbation_identity, series_identity_check, ExpPolySource, TransformSource};
use xilab_core::moments::{compute_moment_table, taylor_check};
use xilab_core::theta::{closed_grid, theta_eval};
use xilab_core::transform::{heat_equation_check, transform_grid};
use xilab_core::{AssocKernel, KernelDescriptor, Result, TransformSpec, Verdict};

use super::assoc::{shape_errors, EX_F};
use super::Body;
use crate::config::RunConfig;
use crate::report::{CsvTable, Status};

#[derive(Clone, Debug, Serialize)]
pub struct SelfCheck {
    pub name: &'static str,
    pub pass: bool,
    pub detail: serde_json::Value,
}

fn check(name: &'static str, pass: bool, detail: serde_json::Value) -> SelfCheck {
    SelfCheck { name, pass, detail }
}

pub fn selftest_checks(cfg: &RunConfig) -> Result<Vec<SelfCheck>> {
    let q = cfg.quadrature();
    let p = q.precision;
    let theta = KernelDescriptor::theta();
    let ex = KernelDescriptor::example_312();
    let mut out = Vec::new();

    let mut even = true;
    for k in ["theta", "gausspoly:15,0,1,0,1", "modtheta:lambda=0.1,m=1", "thetasqrt"] {
        let k: KernelDescriptor = k.parse()?;
        let a = kernel_eval(&k, &p.real(0.7), 0)?;
        let b = kernel_eval(&k, &p.real(-0.7), 0)?;
        even &= a.agrees_with(&b, 0.0);
    }
    out.push(check("kernel_evenness", even, json!({ "t": 0.7 })));

    let d1 = theta_eval(&p.zero(), 1)?;
    out.push(check(
        "theta_odd_derivative_vanishes",
        d1.value.abs() <= d1.abs_error_bound,
        json!({ "value": d1 }),
    ));

    let grid = closed_grid(0.0, 3.0, 31);
    let mut pos = true;
    for &t in &grid {
        let v = theta_eval(&p.real(t), 0)?;
        pos &= v.certified_positive();
        if t > 0.0 {
            pos &= theta_eval(&p.real(t), 1)?.certified_negative();
        }
    }
    out.push(check("theta_positive_decreasing", pos, json!({ "grid": "[0,3] x 31" })));

    let xs = [0.0, 0.5, 1.0, 2.0, 5.0, 8.0];
    let f = transform_grid(&TransformSpec::new(ex.clone()), &xs, 0, &q)?;
    let err = shape_errors(&f.iter().map(|v| v.value_f64()).collect::<Vec<_>>(), &xs, 4.0, &EX_F);
    out.push(check(
        "gaussian_quartic_transform_shape",
        err.iter().all(|&e| e <= 1e-8),
        json!({ "max_relative_error": err.iter().fold(0.0f64, |a, &b| a.max(b)) }),
    ));

    let src = ExpPolySource::gaussian_times_one_plus_square(p);
    let mut worst = 0.0f64;
    for x in [0.0, 0.5, 1.0, 2.0] {
        let got = laguerre_ln(&src, 1, &p.real(x))?.value_f64();
        let want = 2.0 * (-2.0 * x * x).exp() * x * x * (3.0 + x * x);
        worst = worst.max((got - want).abs());
    }
    out.push(check("laguerre_fixture_closed_form", worst <= 1e-10, json!({ "max_abs_error": worst })));

    let tsrc = TransformSource::new(TransformSpec::new(theta.clone()), q.clone());
    let s = series_identity_check(&tsrc, 0.0, 0.3, 4)?;
    out.push(check(
        "series_identity",
        s.within_heuristic,
        json!({ "residual": s.residual, "next_term_heuristic": s.next_term_heuristic }),
    ));

    let esrc = TransformSource::new(TransformSpec::new(ex.clone()), q.clone());
    let a = laguerre_ln(&esrc, 1, &p.real(1.0))?;
    let b = laguerre_kernel_route(&ex, 1, 1.0, &q)?;
    let rel = ((a.value_f64() - b.value_f64()) / a.value_f64()).abs();
    out.push(check("laguerre_route_agreement", rel <= 1e-6, json!({ "relative_difference": rel })));

    let k1 = pd_check_transform(&AssocKernel::new(ex.clone(), 1, q.clone()), 20.0, 100)?;
    let k2 = pd_check_transform(&AssocKernel::new(ex.clone(), 2, q.clone()), 20.0, 100)?;
    out.push(check(
        "associated_kernel_verdicts",
        k1.verdict == Verdict::NoNegativityFound && matches!(k2.verdict, Verdict::NegativityWitness { .. }),
        json!({ "k1": k1.verdict, "k2": k2.verdict }),
    ));

    let sc = sine_criterion(&ex, 1.5, &q)?;
    out.push(check(
        "sine_identity",
        sc.identity_holds && sc.inequality_holds,
        json!({ "identity_residual": sc.identity_residual, "printed_form_holds": sc.printed_form_holds }),
    ));

    let table = compute_moment_table(&theta, 6, Some(cfg.precision_digits))?;
    let turan_ok = table
        .rows
        .iter()
        .filter_map(|r| r.turan.as_ref())
        .all(|t| t.certified_positive());
    out.push(check("theta_turan_low_order", turan_ok, json!({ "k_max": 6 })));

    let tc = taylor_check(&theta, 1.0, 15, &q)?;
    out.push(check(
        "taylor_series_consistency",
        tc.within_next_term,
        json!({ "residual": tc.residual, "next_term": tc.next_term }),
    ));

    let h = heat_equation_check(&TransformSpec::new(theta.clone()), 0.1, 0.0, &q)?;
    out.push(check(
        "backward_heat_equation",
        h.relative_residual <= 1e-6,
        json!({ "relative_residual": h.relative_residual }),
    ));

    let pi = perturbation_identity(1.0, 0.1, 1, &[3.0, 0.0, 1.0], p)?;
    out.push(check(
        "perturbation_identity",
        pi.relative_difference <= 1e-10,
        json!({ "relative_difference": pi.relative_difference }),
    ));

    Ok(out)
}

pub fn selftest(cfg: &RunConfig) -> Result<Body> {
    let checks = selftest_checks(cfg)?;
    let mut csv = CsvTable::new(&["check", "pass"]);
    for c in &checks {
        csv.rows.push(vec![c.name.to_string(), c.pass.to_string()]);
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    let status = if failed.is_empty() {
        Status::Ok
    } else {
        Status::Failed {
            reason: format!("checks failed: {}", failed.join(", ")),
        }
    };
    Ok(Body::new(&["invariant_suite"], json!({ "checks": checks })).csv(csv).status(status))
}
