use xilab_core::assoc_pd::{
    cosine_probe, gbar, pd_check_gram, pd_check_transform, AssocKernel, CosineTarget, Verdict,
};
use xilab_core::kernels::KernelDescriptor;
use xilab_core::moments::{compute_moment_table, fc_eval, taylor_check, turan_margin_report};
use xilab_core::transform::{transform_eval, TransformSpec};
use xilab_core::QuadratureConfig;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::with_digits(30)
}

#[test]
fn certified_witness_gives_negative_gram_form() {
    let k2 = AssocKernel::new(KernelDescriptor::example_312(), 2, cfg());
    let report = pd_check_transform(&k2, 20.0, 200).unwrap();
    let Verdict::NegativityWitness { x, .. } = report.verdict else {
        panic!("expected a witness, got {:?}", report.verdict);
    };
    let probe = cosine_probe(&k2, x, 0.3, 134).unwrap();
    assert!(probe.negative, "{:?}", probe.normalized_form);
    let points: Vec<f64> = (0..134).map(|j| 0.3 * j as f64).collect();
    let gram = pd_check_gram("K_2", |t| Ok(k2.kernel_value(t)?.value_f64()), &points).unwrap();
    assert!(!gram.pd_evidence, "min eigenvalue {}", gram.min_eigenvalue);
}

#[test]
fn gbar_strictly_decreases() {
    let c = cfg();
    let mut prev = f64::INFINITY;
    for t in [0.0, 0.05, 0.1, 0.2, 0.3, 0.45, 0.6] {
        let g = gbar(&KernelDescriptor::theta(), t, &c).unwrap().value.value_f64();
        assert!(g < prev, "t = {t}");
        prev = g;
    }
}

#[test]
fn scaling_multiplies_moments_and_turan_differences() {
    let base = compute_moment_table(&KernelDescriptor::theta(), 5, Some(30)).unwrap();
    let scaled = compute_moment_table(&KernelDescriptor::theta().scaled(3.0).unwrap(), 5, Some(30)).unwrap();
    for (a, b) in base.rows.iter().zip(&scaled.rows) {
        let rb = b.b.value_f64() / a.b.value_f64();
        assert!((rb - 3.0).abs() < 1e-12);
        if let (Some(ta), Some(tb)) = (&a.turan, &b.turan) {
            assert!((tb.value_f64() / ta.value_f64() - 9.0).abs() < 1e-9);
            assert_eq!(ta.certified_sign(), tb.certified_sign());
        }
        if let (Some(ea), Some(eb)) = (&a.double_turan, &b.double_turan) {
            assert!((eb.value_f64() / ea.value_f64() - 81.0).abs() < 1e-7);
            assert_eq!(ea.certified_sign(), eb.certified_sign());
        }
    }
}

#[test]
fn more_digits_keep_certified_margins() {
    let lo = compute_moment_table(&KernelDescriptor::theta(), 8, Some(30)).unwrap();
    let hi = compute_moment_table(&KernelDescriptor::theta(), 8, Some(40)).unwrap();
    for (a, b) in lo.rows.iter().zip(&hi.rows) {
        for (x, y) in [(&a.turan, &b.turan), (&a.double_turan, &b.double_turan)] {
            if let (Some(x), Some(y)) = (x, y) {
                if x.certified_sign().is_some() {
                    assert_eq!(x.certified_sign(), y.certified_sign(), "k = {}", a.k);
                }
                assert!(y.abs_error_bound <= x.abs_error_bound);
            }
        }
    }
    assert!(turan_margin_report(&hi).all_turan_nonnegative);
}

#[test]
fn fc_routes_agree() {
    let c = cfg();
    let r = fc_eval(&KernelDescriptor::theta(), 1.0, 25, &c).unwrap();
    assert!(r.agree && !r.series_divergence, "{r:?}");
    // F_c(−x²) = H(x).
    let r = fc_eval(&KernelDescriptor::theta(), -4.0, 30, &c).unwrap();
    let h = transform_eval(&TransformSpec::new(KernelDescriptor::theta()), &c.precision.real(2.0), 0, &c).unwrap();
    assert!(r.direct.agrees_with(&h, 0.0));
    assert!(r.series.agrees_with(&h, 0.0));
}

#[test]
fn taylor_partial_sum_brackets_h_at_one() {
    let t = taylor_check(&KernelDescriptor::theta(), 1.0, 15, &cfg()).unwrap();
    assert!(t.within_next_term, "{t:?}");
}
