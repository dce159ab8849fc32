//! Acceptance suite: every criterion at its stated tolerance and time limit,
//! one PASS/FAIL line each. Runs without the libtest harness so the lines
//! appear in order.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xilab_core::assoc_pd::{assoc_zero_scan, laguerre_kernel_route, pd_check_transform};
use xilab_core::kernels::{log_concavity_check, ArgMap};
use xilab_core::laguerre::{laguerre_ln, laguerre_profile, perturbation_identity, series_identity_check, ExpPolySource, TransformSource};
use xilab_core::moments::{compute_moment_table, taylor_check};
use xilab_core::theta::{g_function_check, open_closed_grid, sqrt_arg_convexity_check, theta_eval};
use xilab_core::transform::{heat_equation_check, real_zero_scan, transform_grid};
use xilab_core::{AssocKernel, KernelDescriptor, QuadratureConfig, TransformSpec, Verdict};

type Outcome = Result<String, String>;

/// Name, time limit in seconds, check.
type Criterion = (&'static str, Option<u64>, fn() -> Outcome);

fn cfg() -> QuadratureConfig {
    QuadratureConfig::with_digits(30)
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn quartic_transform_shape() -> Outcome {
    let xs = [0.0, 0.5, 1.0, 2.0, 5.0, 8.0];
    let f = transform_grid(&TransformSpec::new(KernelDescriptor::example_312()), &xs, 0, &cfg()).map_err(|e| e.to_string())?;
    let f0 = f[0].value_f64();
    let mut worst = 0.0f64;
    for (x, v) in xs.iter().zip(&f).skip(1) {
        let got = v.value_f64() * (x * x / 4.0).exp() / f0;
        let want = (260.0 - 16.0 * x * x + x.powi(4)) / 260.0;
        worst = worst.max(((got - want) / want).abs());
    }
    ensure(worst <= 1e-8, format!("max relative error {worst:.2e}"))
}

fn associated_kernel_verdicts() -> Outcome {
    let c = cfg();
    let phi = KernelDescriptor::example_312();
    let k1 = AssocKernel::new(phi.clone(), 1, c.clone());
    let k2 = AssocKernel::new(phi, 2, c);
    let r1 = pd_check_transform(&k1, 20.0, 200).map_err(|e| e.to_string())?;
    let r2 = pd_check_transform(&k2, 20.0, 200).map_err(|e| e.to_string())?;
    let z = assoc_zero_scan(&k2, (0.0, 20.0), 400).map_err(|e| e.to_string())?;
    let ok = r1.verdict == Verdict::NoNegativityFound
        && r1.scan.min_value > 0.0
        && matches!(r2.verdict, Verdict::NegativityWitness { .. })
        && z.zeros.len() == 2
        && z.zeros.iter().all(|z| z.simple);
    let zs: Vec<String> = z.zeros.iter().map(|z| format!("{:.10}", z.refined)).collect();
    ensure(
        ok,
        format!("K_1 min {:.3e}; K_2 {:?}; zeros [{}]", r1.scan.min_value, r2.verdict, zs.join(", ")),
    )
}

fn laguerre_route_agreement() -> Outcome {
    let c = cfg();
    let p = c.precision;
    let mut worst = 0.0f64;
    for phi in [KernelDescriptor::gaussian(), KernelDescriptor::example_312(), KernelDescriptor::theta()] {
        let src = TransformSource::new(TransformSpec::new(phi.clone()), c.clone());
        for n in 0..=2u32 {
            for x in [0.0, 1.0, 5.0] {
                let a = laguerre_ln(&src, n as usize, &p.real(x)).map_err(|e| e.to_string())?;
                let b = laguerre_kernel_route(&phi, n, x, &c).map_err(|e| e.to_string())?;
                let rel = ((&a.value - &b.value).abs() / a.value.abs()).to_f64();
                worst = worst.max(rel);
            }
        }
    }
    ensure(worst <= 1e-6, format!("max relative difference {worst:.2e}"))
}

fn series_identity() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for phi in [KernelDescriptor::theta(), KernelDescriptor::example_312()] {
        let src = TransformSource::new(TransformSpec::new(phi.clone()), cfg());
        for (x, y) in [(0.0, 0.3), (1.0, 0.2)] {
            let s = series_identity_check(&src, x, y, 4).map_err(|e| e.to_string())?;
            ok &= s.within_heuristic;
            details.push(format!("{phi}({x},{y}) {:.1e}<{:.1e}", s.residual, s.next_term_heuristic));
        }
    }
    ensure(ok, details.join("; "))
}

fn theta_structure() -> Outcome {
    let p = cfg().precision;
    let mut ok = true;
    for t in open_closed_grid(0.0, 3.0, 500) {
        let rt = p.real(t);
        let v = theta_eval(&rt, 0).map_err(|e| e.to_string())?;
        let d = theta_eval(&rt, 1).map_err(|e| e.to_string())?;
        ok &= v.certified_positive() && d.certified_negative();
    }
    let lc = log_concavity_check(&KernelDescriptor::theta(), ArgMap::Sqrt, (0.01, 10.0), 300, p).map_err(|e| e.to_string())?;
    let cv = sqrt_arg_convexity_check((0.01, 10.0), 300, p).map_err(|e| e.to_string())?;
    let g = g_function_check((0.0, 5.0), 300, p).map_err(|e| e.to_string())?;
    ensure(
        ok && lc.pass && cv.all_positive && g.all_positive,
        format!(
            "sign grid {ok}; sqrt log-concavity {}; sqrt convexity {}; g > 0 {}",
            lc.pass, cv.all_positive, g.all_positive
        ),
    )
}

fn turan_inequalities() -> Outcome {
    let t = compute_moment_table(&KernelDescriptor::theta(), 20, Some(40)).map_err(|e| e.to_string())?;
    let turan: Vec<_> = t.rows.iter().filter_map(|r| r.turan.as_ref().map(|v| (r.k, v))).collect();
    let ks: Vec<usize> = turan.iter().map(|(k, _)| *k).collect();
    let covered = (1..=20).all(|k| ks.contains(&k));
    let certified = turan.iter().all(|(_, v)| v.certified_positive());
    let agree = t.rows.iter().all(|r| r.classical_agrees != Some(false));
    ensure(
        covered && certified && agree,
        format!("k = 1..20 present {covered}; certified {certified}; classical agreement {agree}"),
    )
}

fn laguerre_counterexample() -> Outcome {
    let p = cfg().precision;
    let src = ExpPolySource::gaussian_times_one_plus_square(p);
    let mut worst = 0.0f64;
    for x in [0.0, 0.5, 1.0, 2.0] {
        let got = laguerre_ln(&src, 1, &p.real(x)).map_err(|e| e.to_string())?.value_f64();
        let want = 2.0 * (-2.0 * x * x).exp() * x * x * (3.0 + x * x);
        worst = worst.max((got - want).abs());
    }
    ensure(worst <= 1e-10, format!("max abs error {worst:.2e}"))
}

fn perturbation_fixtures() -> Outcome {
    let p = cfg().precision;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (mut worst, mut negative) = (0.0f64, 0);
    for _ in 0..10 {
        let alpha = rng.gen_range(-2.0..2.0);
        let beta = rng.gen_range(0.05..1.0);
        let m = rng.gen_range(1..=2u32);
        // Positive quadratic: c0 exceeds the vertex depth.
        let c2: f64 = rng.gen_range(0.5..2.0);
        let c1: f64 = rng.gen_range(-1.0..1.0);
        let c0 = c1 * c1 / (4.0 * c2) + rng.gen_range(0.5..2.0);
        let g = [c0, c1, c2];
        let r = perturbation_identity(alpha, beta, m, &g, p).map_err(|e| e.to_string())?;
        worst = worst.max(r.relative_difference);
        let near = perturbation_identity(alpha, 0.01, m, &g, p).map_err(|e| e.to_string())?;
        worst = worst.max(near.relative_difference);
        negative += usize::from(near.lhs.certified_negative());
    }
    ensure(
        worst <= 1e-10 && negative == 10,
        format!("max relative difference {worst:.2e}; negative at beta = 0.01 in {negative}/10"),
    )
}

fn xi_laguerre_probe() -> Outcome {
    let grid = xilab_core::theta::closed_grid(0.0, 100.0, 2000);
    let src = TransformSource::new(TransformSpec::new(KernelDescriptor::theta()), cfg());
    let prof = laguerre_profile(&src, 1, &grid).map_err(|e| e.to_string())?;
    ensure(
        prof.all_certified_positive,
        format!("min {:.3e} at x = {}", prof.min_value, prof.argmin),
    )
}

fn heat_flow() -> Outcome {
    let c = cfg();
    let base = TransformSpec::new(KernelDescriptor::theta());
    let mut worst = 0.0f64;
    for x in [0.0, 5.0] {
        let h = heat_equation_check(&base, 0.1, x, &c).map_err(|e| e.to_string())?;
        worst = worst.max(h.relative_residual);
    }
    let z = real_zero_scan(&base.clone().with_lambda(0.6), (0.0, 60.0), 600, &c).map_err(|e| e.to_string())?;
    let simple = !z.zeros.is_empty() && z.zeros.iter().all(|z| z.simple);
    ensure(
        worst <= 1e-6 && simple,
        format!("max residual {worst:.2e}; {} zeros at lambda = 0.6, all simple {simple}", z.zeros.len()),
    )
}

fn taylor_consistency() -> Outcome {
    let t = taylor_check(&KernelDescriptor::theta(), 1.0, 15, &cfg()).map_err(|e| e.to_string())?;
    ensure(
        t.within_next_term,
        format!("residual {:.2e}; next term {:.2e}", t.residual, t.next_term),
    )
}

fn selftest_determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_xilab"))
            .arg("selftest")
            .env_remove("XILAB_CONFIG")
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    ensure(
        a.status.success() && b.status.success() && a.stdout == b.stdout && !a.stdout.is_empty(),
        format!("exit {:?}/{:?}; {} bytes; identical {}", a.status.code(), b.status.code(), a.stdout.len(), a.stdout == b.stdout),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("quartic Gaussian transform shape", Some(10), quartic_transform_shape),
        ("associated kernel verdicts K_1 / K_2", Some(120), associated_kernel_verdicts),
        ("derivative and kernel routes for L_n agree", Some(300), laguerre_route_agreement),
        ("series identity for |F(x+iy)|^2", None, series_identity),
        ("theta kernel structure", None, theta_structure),
        ("Turan inequalities k = 1..20 at 40 digits", Some(300), turan_inequalities),
        ("Laguerre counterexample fixture", None, laguerre_counterexample),
        ("perturbation identity fixtures", None, perturbation_fixtures),
        ("L_1(x; H) > 0 on [0, 100]", Some(600), xi_laguerre_probe),
        ("heat flow residual and simple zeros", None, heat_flow),
        ("Taylor moments against H(1)", None, taylor_consistency),
        ("selftest determinism", None, selftest_determinism),
    ];
    let mut failures = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let over = limit.is_some_and(|s| elapsed > Duration::from_secs(s));
        let (pass, detail) = match outcome {
            Ok(d) if !over => (true, d),
            Ok(d) => (false, format!("{d}; over the {}s limit", limit.unwrap_or(0))),
            Err(d) => (false, d),
        };
        failures += usize::from(!pass);
        println!(
            "criterion {:>2} {} {name} ({:.1}s): {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of 12 passed", 12 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
