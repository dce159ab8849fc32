//! Associated kernels, positive-definiteness checks and the quartic
//! Gaussian example pipeline.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use xilab_core::assoc_pd::{
    assoc_transform, assoc_zero_scan, cosine_probe, pd_check_gram, pd_check_sine, pd_check_transform, CosineTarget,
};
use xilab_core::kernels::{admissibility_report, log_concavity_check, ArgMap, DecayCondition, KernelFunction};
use xilab_core::laguerre::TransformSource;
use xilab_core::transform::transform_grid;
use xilab_core::{AssocKernel, KernelDescriptor, PDReport, QuadratureConfig, Result, TransformSpec, Verdict};

use super::{invalid, Body};
use crate::cli::{AssocArgs, PdMethodArg};
use crate::config::RunConfig;
use crate::report::{CsvTable, Status};

fn assoc_kernel(phi: &KernelDescriptor, n: u32, shifted_m: Option<u32>, q: QuadratureConfig) -> AssocKernel {
    match shifted_m {
        Some(m) => AssocKernel::shifted(phi.clone(), m, q),
        None => AssocKernel::new(phi.clone(), n, q),
    }
}

pub fn assoc(a: &AssocArgs, (lo, hi): (f64, f64), n: usize, cfg: &RunConfig) -> Result<Body> {
    if n < 2 {
        return Err(invalid("grid needs at least 2 points"));
    }
    let k = assoc_kernel(&a.kernel, a.n, a.shifted_m, cfg.quadrature());
    let grid = xilab_core::theta::closed_grid(lo, hi, n);
    let values = grid.par_iter().map(|&t| k.kernel_value(t)).collect::<Result<Vec<_>>>()?;
    let points: Vec<_> = grid.iter().copied().zip(values.iter().cloned()).collect();
    let all_positive = values.iter().all(|v| v.certified_positive());
    Ok(Body::new(
        &["associated_kernel"],
        json!({
            "kernel": k.name(),
            "all_certified_positive": all_positive,
            "points": super::basic::points_json(&points, "t"),
        }),
    )
    .bound("max_abs_error_bound", &values)
    .csv(CsvTable::estimates("t", points, cfg.precision_digits)))
}

enum Target {
    Kernel(TransformSource),
    Assoc(AssocKernel),
}

impl Target {
    fn cosine(&self) -> &dyn CosineTarget {
        match self {
            Target::Kernel(s) => s,
            Target::Assoc(k) => k,
        }
    }
}

fn verdict_status(r: &PDReport) -> Status {
    match &r.verdict {
        Verdict::Inconclusive { x, value, bound } => Status::Inconclusive {
            reason: format!("sign of {value:e} ± {bound:e} at x = {x} not certified"),
        },
        _ => Status::Ok,
    }
}

#[allow(clippy::too_many_arguments)]
pub fn pd(
    kernel: &KernelDescriptor,
    n: Option<u32>,
    shifted_m: Option<u32>,
    method: PdMethodArg,
    xmax: f64,
    grid: usize,
    points: usize,
    spacing: f64,
    cfg: &RunConfig,
) -> Result<Body> {
    let q = cfg.quadrature();
    let target = match (n, shifted_m) {
        (None, None) => Target::Kernel(TransformSource::new(TransformSpec::new(kernel.clone()), q)),
        (n, m) => Target::Assoc(assoc_kernel(kernel, n.unwrap_or(0), m, q)),
    };
    pd_on(&target, method, xmax, grid, points, spacing)
}

fn pd_on(target: &Target, method: PdMethodArg, xmax: f64, grid: usize, points: usize, spacing: f64) -> Result<Body> {
    match method {
        PdMethodArg::Transform => {
            let r = pd_check_transform(target.cosine(), xmax, grid)?;
            let status = verdict_status(&r);
            Ok(Body::new(&["bochner_transform_criterion"], r).status(status))
        }
        PdMethodArg::Sine => {
            let Target::Assoc(k) = target else {
                return Err(invalid("the sine criterion needs an associated kernel (--n or --shifted-m)"));
            };
            let r = pd_check_sine(k, xmax, grid)?;
            let status = verdict_status(&r);
            Ok(Body::new(&["sine_criterion", "integration_by_parts_identity"], r).status(status))
        }
        PdMethodArg::Gram => {
            if !(spacing > 0.0) {
                return Err(invalid("spacing must be positive"));
            }
            let pts: Vec<f64> = (0..points).map(|j| j as f64 * spacing).collect();
            let c = target.cosine();
            let r = pd_check_gram(&c.label(), |t| Ok(c.kernel_value(t)?.value_f64()), &pts)?;
            Ok(Body::new(&["discrete_pd_form"], r))
        }
    }
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    pass: bool,
    detail: serde_json::Value,
}

/// `x e^{x²/s} f(x)/f(0)` against `P(x)/P(0)` at each `x`, where `P` is a
/// polynomial in `x²` with coefficients `c`.
pub(crate) fn shape_errors(values: &[f64], xs: &[f64], s: f64, c: &[f64]) -> Vec<f64> {
    let p = |x: f64| c.iter().rev().fold(0.0, |acc, &a| acc * x * x + a);
    xs.iter()
        .zip(values)
        .map(|(&x, &v)| {
            let got = v * (x * x / s).exp() / values[0];
            let want = p(x) / p(0.0);
            ((got - want) / want).abs()
        })
        .collect()
}

/// Positive roots of a polynomial in `x²`, by bracketing on a fine grid.
fn positive_roots(c: &[f64], x_max: f64) -> Vec<f64> {
    let p = |x: f64| c.iter().rev().fold(0.0, |acc, &a| acc * x * x + a);
    let n = 20_000;
    let mut roots = Vec::new();
    for i in 0..n {
        let (mut a, mut b) = (x_max * i as f64 / n as f64, x_max * (i + 1) as f64 / n as f64);
        if p(a) * p(b) >= 0.0 {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if p(a) * p(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

pub const EX_F: [f64; 3] = [260.0, -16.0, 1.0];
pub const EX_K1: [f64; 5] = [84240.0, -13536.0, 712.0, -24.0, 1.0];
pub const EX_K2: [f64; 5] = [107088.0, -18496.0, 696.0, -16.0, 1.0];
const SHAPE_X: [f64; 6] = [0.0, 0.5, 1.0, 2.0, 5.0, 8.0];
const SHAPE_TOL: f64 = 1e-8;
/// The log-log decay fit only sees the Gaussian rate once `t² ≫ 4 log t`.
const ADMISSIBILITY_T: f64 = 40.0;

pub fn example312(cfg: &RunConfig) -> Result<Body> {
    let q = cfg.quadrature();
    let p = q.precision;
    let phi = KernelDescriptor::example_312();
    let mut checks = Vec::new();

    let adm = admissibility_report(&phi, ADMISSIBILITY_T, 400, p)?;
    checks.push(Check {
        name: "conditions_i_to_iv_hold_decay_borderline",
        pass: adm.passes_i_to_iv() && adm.decay_condition == DecayCondition::Borderline,
        detail: json!({ "decay_exponent": adm.decay_exponent, "decay_condition": adm.decay_condition }),
    });
    let lc = log_concavity_check(&phi, ArgMap::Identity, (0.0, 5.0), 100, p)?;
    checks.push(Check {
        name: "log_concave",
        pass: lc.pass,
        detail: json!({ "min_value": lc.min_value }),
    });

    let f = transform_grid(&TransformSpec::new(phi.clone()), &SHAPE_X, 0, &q)?;
    let err = shape_errors(&f.iter().map(|v| v.value_f64()).collect::<Vec<_>>(), &SHAPE_X, 4.0, &EX_F);
    checks.push(Check {
        name: "transform_shape",
        pass: err.iter().all(|&e| e <= SHAPE_TOL),
        detail: json!({ "x": SHAPE_X, "relative_error": err }),
    });

    let k1 = AssocKernel::new(phi.clone(), 1, q.clone());
    let k2 = AssocKernel::new(phi.clone(), 2, q.clone());
    for (name, k, c) in [("k1_transform_shape", &k1, &EX_K1[..]), ("k2_transform_shape", &k2, &EX_K2[..])] {
        let v = SHAPE_X
            .iter()
            .map(|&x| Ok(assoc_transform(k, 2.0 * x, 0)?.value_f64()))
            .collect::<Result<Vec<_>>>()?;
        let err = shape_errors(&v, &SHAPE_X, 2.0, c);
        checks.push(Check {
            name,
            pass: err.iter().all(|&e| e <= SHAPE_TOL),
            detail: json!({ "x": SHAPE_X, "relative_error": err }),
        });
    }

    let pd1 = pd_check_transform(&k1, 20.0, 200)?;
    checks.push(Check {
        name: "k1_no_negativity_found",
        pass: pd1.verdict == Verdict::NoNegativityFound && pd1.scan.min_value > 0.0,
        detail: json!(pd1),
    });
    let pd2 = pd_check_transform(&k2, 20.0, 200)?;
    let witness = match pd2.verdict {
        Verdict::NegativityWitness { x, .. } => Some(x),
        _ => None,
    };
    checks.push(Check {
        name: "k2_negativity_witness",
        pass: witness.is_some(),
        detail: json!(pd2),
    });
    if let Some(x) = witness {
        let probe = cosine_probe(&k2, x, 0.3, 134)?;
        checks.push(Check {
            name: "k2_gram_form_negative_at_witness",
            pass: probe.negative,
            detail: json!(probe),
        });
    }

    let zeros = assoc_zero_scan(&k2, (0.0, 20.0), 400)?;
    let expected: Vec<f64> = positive_roots(&EX_K2, 10.0).iter().map(|x| 2.0 * x).collect();
    let found: Vec<f64> = zeros.zeros.iter().map(|z| z.refined).collect();
    let matched = found.len() == expected.len()
        && found.iter().zip(&expected).all(|(a, b)| (a - b).abs() <= 1e-8 * b)
        && zeros.zeros.iter().all(|z| z.simple);
    checks.push(Check {
        name: "k2_transform_two_simple_positive_zeros",
        pass: matched,
        detail: json!({ "found": found, "expected_from_polynomial": expected, "zero_report": zeros }),
    });

    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    let status = if failed.is_empty() {
        Status::Ok
    } else if matches!(pd1.verdict, Verdict::Inconclusive { .. }) {
        Status::Inconclusive { reason: "K_1 scan could not be certified".into() }
    } else {
        Status::Failed { reason: format!("checks failed: {}", failed.join(", ")) }
    };
    Ok(Body::new(
        &[
            "example_gaussian_quartic",
            "bochner_transform_criterion",
            "associated_kernel",
            "associated_kernel_transform_identity",
            "real_zero_scan",
        ],
        json!({ "kernel": phi.to_string(), "checks": checks }),
    )
    .bound("transform_max_abs_error_bound", &f)
    .status(status))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_roots() {
        // (u − 1)(u − 4) = u² − 5u + 4 → x = 1, 2.
        let r = positive_roots(&[4.0, -5.0, 1.0], 3.0);
        assert_eq!(r.len(), 2);
        assert!((r[0] - 1.0).abs() < 1e-12 && (r[1] - 2.0).abs() < 1e-12);
        assert_eq!(positive_roots(&EX_K1, 10.0).len(), 0);
        assert_eq!(positive_roots(&EX_K2, 10.0).len(), 2);
    }

    #[test]
    fn shape_of_exact_gaussian() {
        let xs = [0.0, 1.0, 2.0];
        let v: Vec<f64> = xs.iter().map(|x: &f64| (-x * x / 4.0).exp() * 7.0).collect();
        assert!(shape_errors(&v, &xs, 4.0, &[1.0]).iter().all(|&e| e < 1e-15));
    }
}
