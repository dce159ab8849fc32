use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xilab_core::kernels::KernelDescriptor;
use xilab_core::laguerre::{laguerre_from_zeros, laguerre_ln, ExpPolySource, TransformSource, ZeroFactorization};
use xilab_core::numerics::finite_difference_est;
use xilab_core::transform::{heat_equation_check, transform_eval, TransformSpec};
use xilab_core::{Precision, QuadratureConfig};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::with_digits(30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn transform_is_even_in_x(x in 0.0f64..20.0) {
        let c = cfg();
        let p = c.precision;
        for k in [KernelDescriptor::theta(), KernelDescriptor::example_312()] {
            let spec = TransformSpec::new(k);
            let a = transform_eval(&spec, &p.real(x), 0, &c).unwrap();
            let b = transform_eval(&spec, &p.real(-x), 0, &c).unwrap();
            prop_assert!(a.agrees_with(&b, 0.0));
        }
    }

    #[test]
    fn l0_is_a_square(x in -10.0f64..10.0) {
        let c = cfg();
        let src = TransformSource::new(TransformSpec::new(KernelDescriptor::theta()), c.clone());
        let l0 = laguerre_ln(&src, 0, &c.precision.real(x)).unwrap();
        prop_assert!(!l0.value.is_negative());
    }
}

#[test]
fn first_derivative_matches_finite_difference() {
    let c = cfg();
    let p = c.precision;
    for k in [KernelDescriptor::theta(), KernelDescriptor::example_312()] {
        let spec = TransformSpec::new(k.clone());
        for x in [0.5, 3.0, 10.0] {
            let d1 = transform_eval(&spec, &p.real(x), 1, &c).unwrap();
            let fd = finite_difference_est(|y| transform_eval(&spec, y, 0, &c), &p.real(x), 1, 0.1).unwrap();
            assert!(d1.agrees_with(&fd, 0.0), "{k} x = {x}");
        }
    }
}

#[test]
fn heat_factor_on_a_gaussian_matches_closed_form() {
    // ∫₀^∞ e^{−(1−λ)t²} cos(xt) dt = (√π / 2√(1−λ)) e^{−x²/(4(1−λ))}.
    let c = cfg();
    let p = c.precision;
    for lambda in [-0.6, 0.3] {
        let spec = TransformSpec::new(KernelDescriptor::gaussian()).with_lambda(lambda);
        for x in [0.0, 2.0, 5.0] {
            let v = transform_eval(&spec, &p.real(x), 0, &c).unwrap();
            let s = p.one() - lambda;
            let exact = p.pi().sqrt() / (s.sqrt() * 2.0) * (-(p.real(x * x)) / (s * 4.0)).exp();
            assert!((&v.value - &exact).abs() <= v.abs_error_bound, "lambda = {lambda}, x = {x}");
        }
    }
}

#[test]
fn backward_heat_equation_residuals() {
    let c = cfg();
    let spec = TransformSpec::new(KernelDescriptor::theta());
    for x in [0.0, 5.0] {
        let h = heat_equation_check(&spec, 0.1, x, &c).unwrap();
        assert!(h.relative_residual <= 1e-6, "x = {x}: {}", h.relative_residual);
    }
}

#[test]
fn zero_formula_matches_derivative_route_on_random_polynomials() {
    let p = Precision::digits(30);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let deg = rng.gen_range(1..=6);
        let zeros: Vec<f64> = (0..deg).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let f = ZeroFactorization {
            constant: rng.gen_range(0.5..2.0),
            a: 0.0,
            real_zeros: zeros.clone(),
            complex_pairs: vec![],
        };
        let src = ExpPolySource::new(f.to_exp_poly(p), p, "random");
        for _ in 0..5 {
            let x = rng.gen_range(-4.0..4.0);
            let direct = laguerre_ln(&src, 1, &p.real(x)).unwrap();
            let formula = laguerre_from_zeros(&f, &p.real(x)).unwrap();
            let rel = ((&direct.value - &formula) / &formula).abs().to_f64();
            assert!(rel <= 1e-8, "zeros {zeros:?} x = {x}: rel {rel}");
        }
    }
}
