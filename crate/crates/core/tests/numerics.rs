use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;
use xilab_core::numerics::{bracket_zeros, integrate_half_line, ExpPoly, ZeroOptions};
use xilab_core::{Precision, QuadratureConfig, Real, Truncation};

fn cfg() -> QuadratureConfig {
    let mut c = QuadratureConfig::with_digits(30);
    c.truncation = Truncation::DecayBound { c: 200.0, eps: 0.0 };
    c
}

/// `Γ(k + 1/2) / 2 = ∫₀^∞ t^{2k} e^{−t²} dt`.
fn gaussian_moment(k: u32, p: Precision) -> Real {
    let g = Float::with_val(p.bits(), k as f64 + 0.5).gamma();
    Real::from_float(g) / 2.0
}

#[test]
fn bounds_cover_twenty_gaussian_moments() {
    let c = cfg();
    let p = c.precision;
    for k in 0..20u32 {
        // ∫_R^∞ t^{2k} e^{−t²} ≤ R^{2k−1} e^{−R²} / (2 − (2k−1)/R²), by parts.
        let r = 14.0;
        let kk = k as f64;
        let tail = p.real(r).powi(2 * k as i32 - 1) * p.real(-r * r).exp() / (2.0 - (2.0 * kk - 1.0) / (r * r));
        let mut ck = c.clone().with_truncation(Truncation::Radius { radius: r, tail_bound: tail });
        ck.abs_tol = 0.0;
        let v = integrate_half_line(|t| Ok(t.powi(2 * k as i32) * (-t.square()).exp()), &ck).unwrap();
        let exact = gaussian_moment(k, p);
        assert!((&v.value - &exact).abs() <= v.abs_error_bound, "k = {k}: {} vs {}", v.value, exact);
    }
}

fn poly_gauss(coeffs: &[f64], t: &Real) -> Real {
    let mut acc = t.zero_like();
    for c in coeffs.iter().rev() {
        acc = acc * t + *c;
    }
    acc * (-t.square()).exp()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn quadrature_is_linear(
        f in prop::collection::vec(-2.0f64..2.0, 1..5),
        g in prop::collection::vec(-2.0f64..2.0, 1..5),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let mut c = cfg();
        c.truncation = Truncation::DecayBound { c: 400.0, eps: 0.0 };
        let i_f = integrate_half_line(|t| Ok(poly_gauss(&f, t)), &c).unwrap();
        let i_g = integrate_half_line(|t| Ok(poly_gauss(&g, t)), &c).unwrap();
        let i_fg = integrate_half_line(|t| Ok(poly_gauss(&f, t) * a + poly_gauss(&g, t) * b), &c).unwrap();
        let p = c.precision;
        let combo = i_f.scale(&p.real(a)).add(&i_g.scale(&p.real(b)));
        prop_assert!(i_fg.agrees_with(&combo, 0.0));
    }
}

#[test]
fn zeros_of_random_real_rooted_polynomials() {
    let p = Precision::digits(30);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n_grid = 400;
    let (lo, hi) = (-5.0, 5.0);
    let spacing = (hi - lo) / (n_grid - 1) as f64;
    for _ in 0..20 {
        let deg = rng.gen_range(1..=6);
        let mut roots: Vec<f64> = Vec::new();
        while roots.len() < deg {
            let r: f64 = rng.gen_range(-4.5..4.5);
            if roots.iter().all(|s| (s - r).abs() >= 10.0 * spacing) {
                roots.push(r);
            }
        }
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let f = ExpPoly::from_roots(&roots.iter().map(|&r| p.real(r)).collect::<Vec<_>>(), p);
        let opts = ZeroOptions { precision: p, ..ZeroOptions::default() };
        let rep = bracket_zeros(|x| Ok(f.eval(&p.real(x))), (lo, hi), n_grid, &opts).unwrap();
        assert_eq!(rep.zeros.len(), roots.len(), "roots {roots:?}");
        for (z, r) in rep.zeros.iter().zip(&roots) {
            assert!((z.refined - r).abs() < 1e-10, "{} vs {r}", z.refined);
            assert!(z.simple);
        }
    }
}
