use proptest::prelude::*;
use xilab_core::kernels::{admissibility_report, kernel_eval, DecayCondition, KernelDescriptor, KernelFamily};
use xilab_core::numerics::finite_difference_est;
use xilab_core::theta::{closed_grid, g_function_check, sqrt_arg_convexity_check, theta_eval};
use xilab_core::Precision;

fn families() -> Vec<KernelDescriptor> {
    vec![
        KernelDescriptor::theta(),
        KernelDescriptor::gaussian(),
        KernelDescriptor::example_312(),
        KernelDescriptor::new(KernelFamily::ModifiedTheta { lambda: -0.3, m: 1 }).unwrap(),
        KernelDescriptor::new(KernelFamily::ThetaSqrtArg).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_family_is_even(t in 0.01f64..2.5) {
        let p = Precision::digits(30);
        for k in families() {
            let a = kernel_eval(&k, &p.real(t), 0).unwrap();
            let b = kernel_eval(&k, &p.real(-t), 0).unwrap();
            prop_assert_eq!(&a.value, &b.value, "{}", k);
        }
    }
}

#[test]
fn odd_derivatives_vanish_at_zero() {
    let p = Precision::digits(30);
    for k in families().into_iter().filter(|k| !matches!(k.family, KernelFamily::ThetaSqrtArg)) {
        for d in [1, 3] {
            let v = kernel_eval(&k, &p.zero(), d).unwrap();
            assert!(v.value.abs() <= v.abs_error_bound, "{k} d = {d}: {}", v.value);
        }
    }
}

#[test]
fn theta_is_positive_on_grid() {
    let p = Precision::digits(30);
    for t in closed_grid(0.0, 3.0, 61) {
        assert!(theta_eval(&p.real(t), 0).unwrap().certified_positive(), "t = {t}");
    }
}

#[test]
fn theta_bounds_survive_more_digits() {
    for t in closed_grid(0.0, 3.0, 13) {
        let lo = theta_eval(&Precision::digits(30).real(t), 0).unwrap();
        let hi = theta_eval(&Precision::digits(40).real(t), 0).unwrap();
        let diff = (&hi.value - &lo.value).abs();
        assert!(diff <= lo.abs_error_bound, "t = {t}: {diff} vs {}", lo.abs_error_bound);
    }
}

#[test]
fn theta_derivatives_match_finite_differences() {
    let p = Precision::digits(30);
    for t in [0.1, 0.5, 1.0] {
        for d in 1..=4 {
            let exact = theta_eval(&p.real(t), d).unwrap();
            let fd = finite_difference_est(|s| theta_eval(s, d - 1), &p.real(t), 1, 0.05).unwrap();
            assert!(exact.agrees_with(&fd, 0.0), "t = {t}, d = {d}: {} vs {}", exact.value, fd.value);
        }
    }
}

#[test]
fn g_positivity_and_sqrt_log_concavity_hold_together() {
    let p = Precision::digits(30);
    let g = g_function_check((0.0, 5.0), 100, p).unwrap();
    let s = sqrt_arg_convexity_check((0.01, 5.0), 100, p).unwrap();
    assert!(g.all_positive);
    assert!(!s.negative_found);
}

#[test]
fn admissibility_of_reference_families() {
    let p = Precision::digits(30);
    let quartic = admissibility_report(&KernelDescriptor::example_312(), 40.0, 400, p).unwrap();
    assert!(quartic.passes_i_to_iv());
    assert_eq!(quartic.decay_condition, DecayCondition::Borderline);

    let theta = admissibility_report(&KernelDescriptor::theta(), 3.0, 200, p).unwrap();
    assert!(theta.passes_i_to_iv());
    assert!(matches!(theta.decay_condition, DecayCondition::Satisfied { .. }));

    let modified = KernelDescriptor::new(KernelFamily::ModifiedTheta { lambda: 0.1, m: 1 }).unwrap();
    let r = admissibility_report(&modified, 3.0, 200, p).unwrap();
    let (t, _) = r.monotone_decreasing_on_positive_axis.witness.expect("not monotone");
    assert!(t < 0.5, "witness at {t}");
}
