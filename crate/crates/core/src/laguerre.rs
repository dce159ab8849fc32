//! Laguerre-type expressions built from derivatives of an entire function:
//! the generalized `L_n`, the classical chain `L_{1,p}`, the series identity
//! for `|F(x+iy)|²`, the complex Laguerre expression, and closed forms in
//! terms of zeros.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{finite_difference_est, EstimatedValue, ExpPoly, Precision, QuadratureConfig, Real};
use crate::transform::{transform_complex_derivatives, transform_derivatives, transform_grid_derivatives, ComplexValue, TransformSpec};

/// Highest derivative order any Laguerre expression here requests.
pub const MAX_DERIVATIVE: usize = 8;

/// Something that can produce `f^{(j)}` on the real axis and at complex
/// points.
pub trait DerivativeSource: Sync {
    fn label(&self) -> String;

    fn precision(&self) -> Precision;

    /// `f^{(j)}(x)` for `j` in `0..=p_max`.
    fn derivatives(&self, x: &Real, p_max: usize) -> Result<Vec<EstimatedValue>>;

    /// `f^{(j)}(x + iy)` for `j` in `0..=p_max`.
    fn complex_derivatives(&self, x: &Real, y: &Real, p_max: usize) -> Result<Vec<ComplexValue>>;

    /// Derivatives at many real points, indexed `[point][order]`.
    fn grid_derivatives(&self, xs: &[f64], p_max: usize) -> Result<Vec<Vec<EstimatedValue>>> {
        let p = self.precision();
        xs.par_iter().map(|&x| self.derivatives(&p.real(x), p_max)).collect()
    }
}

/// The cosine transform of a kernel, evaluated by quadrature.
#[derive(Clone, Debug)]
pub struct TransformSource {
    pub spec: TransformSpec,
    pub cfg: QuadratureConfig,
}

impl TransformSource {
    pub fn new(spec: TransformSpec, cfg: QuadratureConfig) -> Self {
        TransformSource { spec, cfg }
    }
}

impl DerivativeSource for TransformSource {
    fn label(&self) -> String {
        format!("transform[{}]", self.spec)
    }

    fn precision(&self) -> Precision {
        self.cfg.precision
    }

    fn derivatives(&self, x: &Real, p_max: usize) -> Result<Vec<EstimatedValue>> {
        transform_derivatives(&self.spec, x, p_max, &self.cfg)
    }

    fn complex_derivatives(&self, x: &Real, y: &Real, p_max: usize) -> Result<Vec<ComplexValue>> {
        transform_complex_derivatives(&self.spec, x, y, p_max, &self.cfg)
    }

    fn grid_derivatives(&self, xs: &[f64], p_max: usize) -> Result<Vec<Vec<EstimatedValue>>> {
        transform_grid_derivatives(&self.spec, xs, p_max, &self.cfg)
    }
}

/// A closed-form `e^{c x²} p(x)` evaluated exactly (up to rounding).
#[derive(Clone, Debug)]
pub struct ExpPolySource {
    pub f: ExpPoly,
    pub precision: Precision,
    pub label: String,
}

impl ExpPolySource {
    pub fn new(f: ExpPoly, precision: Precision, label: impl Into<String>) -> Self {
        ExpPolySource {
            f,
            precision,
            label: label.into(),
        }
    }

    /// `e^{-x²}(1 + x²)`.
    pub fn gaussian_times_one_plus_square(p: Precision) -> Self {
        ExpPolySource::new(
            ExpPoly::new(p.real(-1.0), vec![p.one(), p.zero(), p.one()]),
            p,
            "exp(-x^2)(1+x^2)",
        )
    }

    fn rounding(&self, v: &Real) -> Real {
        v.abs() * self.precision.epsilon() * 64.0
    }
}

/// `a + ib` as a pair of reals.
#[derive(Clone, Debug)]
struct Cx(Real, Real);

impl Cx {
    fn mul(&self, o: &Cx) -> Cx {
        Cx(&self.0 * &o.0 - &self.1 * &o.1, &self.0 * &o.1 + &self.1 * &o.0)
    }
}

impl DerivativeSource for ExpPolySource {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn precision(&self) -> Precision {
        self.precision
    }

    fn derivatives(&self, x: &Real, p_max: usize) -> Result<Vec<EstimatedValue>> {
        let mut d = self.f.clone();
        let mut out = Vec::with_capacity(p_max + 1);
        for _ in 0..=p_max {
            let v = d.eval(x);
            out.push(EstimatedValue::new(v.clone(), self.rounding(&v))?);
            d = d.derivative();
        }
        Ok(out)
    }

    fn complex_derivatives(&self, x: &Real, y: &Real, p_max: usize) -> Result<Vec<ComplexValue>> {
        let z = Cx(x.clone(), y.clone());
        // e^{c z²} = e^{c(x²−y²)} (cos 2cxy + i sin 2cxy)
        let c = &self.f.c;
        let modulus = (c * (x.square() - y.square())).exp();
        let (s, co) = (c * x * y * 2.0).sin_cos();
        let e = Cx(&modulus * co, &modulus * s);
        let mut d = self.f.clone();
        let mut out = Vec::with_capacity(p_max + 1);
        for _ in 0..=p_max {
            let mut acc = Cx(x.zero_like(), x.zero_like());
            for a in d.coeffs.iter().rev() {
                acc = acc.mul(&z);
                acc.0 += a;
            }
            let v = acc.mul(&e);
            out.push(ComplexValue {
                re: EstimatedValue::new(v.0.clone(), self.rounding(&v.0))?,
                im: EstimatedValue::new(v.1.clone(), self.rounding(&v.1))?,
            });
            d = d.derivative();
        }
        Ok(out)
    }
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_DERIVATIVE {
        return Err(Error::UnsupportedDerivativeOrder {
            order,
            max: MAX_DERIVATIVE,
        });
    }
    Ok(())
}

/// `L_n` from a precomputed derivative list `d[0..=2n]`.
fn ln_from_derivatives(d: &[EstimatedValue], n: usize, p: Precision) -> EstimatedValue {
    let two_n = 2 * n;
    let mut acc = EstimatedValue::exact(p.zero());
    // Terms j and 2n−j coincide; sum j < n twice and add the middle once.
    for j in 0..=n {
        let mut c = p.binomial(two_n as u32, j as u32) / p.factorial(two_n as u32);
        if (j + n) % 2 == 1 {
            c = -c;
        }
        if j < n {
            c *= 2.0;
        }
        acc = acc.add(&d[j].mul(&d[two_n - j]).scale(&c));
    }
    acc
}

/// `L_n(x) = Σ_{j=0}^{2n} (−1)^{j+n} C(2n,j) f^{(j)} f^{(2n−j)} / (2n)!`.
pub fn laguerre_ln<S: DerivativeSource + ?Sized>(src: &S, n: usize, x: &Real) -> Result<EstimatedValue> {
    check_order(2 * n)?;
    let d = src.derivatives(x, 2 * n)?;
    Ok(ln_from_derivatives(&d, n, src.precision()))
}

/// [`laguerre_ln`] for a kernel transform.
pub fn laguerre_ln_derivative_route(
    spec: &TransformSpec,
    n: usize,
    x: &Real,
    cfg: &QuadratureConfig,
) -> Result<EstimatedValue> {
    laguerre_ln(&TransformSource::new(spec.clone(), cfg.clone()), n, x)
}

/// `(f^{(p)})² − f^{(p−1)} f^{(p+1)}`.
pub fn laguerre_lp_chain<S: DerivativeSource + ?Sized>(src: &S, p: usize, x: &Real) -> Result<EstimatedValue> {
    if p == 0 {
        return Err(Error::InvalidInput("chain index p must be at least 1".into()));
    }
    check_order(p + 1)?;
    let d = src.derivatives(x, p + 1)?;
    Ok(d[p].mul(&d[p]).sub(&d[p - 1].mul(&d[p + 1])))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Derivative,
    Kernel,
}

#[derive(Clone, Debug, Serialize)]
pub struct LaguerreProfile {
    pub source: String,
    pub n: usize,
    pub grid: Vec<f64>,
    pub values: Vec<EstimatedValue>,
    pub route: Route,
    pub min_value: f64,
    pub argmin: f64,
    /// Every value has a certified sign of `+`.
    pub all_certified_positive: bool,
}

impl LaguerreProfile {
    pub fn from_values(source: String, n: usize, grid: Vec<f64>, values: Vec<EstimatedValue>, route: Route) -> Self {
        let (mut min_value, mut argmin) = (f64::INFINITY, f64::NAN);
        for (x, v) in grid.iter().zip(&values) {
            let f = v.value_f64();
            if f < min_value {
                min_value = f;
                argmin = *x;
            }
        }
        let all_certified_positive = values.iter().all(EstimatedValue::certified_positive);
        LaguerreProfile {
            source,
            n,
            grid,
            values,
            route,
            min_value,
            argmin,
            all_certified_positive,
        }
    }
}

/// `L_n` over a grid via derivatives of the source.
pub fn laguerre_profile<S: DerivativeSource + ?Sized>(src: &S, n: usize, grid: &[f64]) -> Result<LaguerreProfile> {
    check_order(2 * n)?;
    let p = src.precision();
    let values = src
        .grid_derivatives(grid, 2 * n)?
        .iter()
        .map(|d| ln_from_derivatives(d, n, p))
        .collect();
    Ok(LaguerreProfile::from_values(src.label(), n, grid.to_vec(), values, Route::Derivative))
}

fn modulus_squared(z: &ComplexValue) -> EstimatedValue {
    z.re.mul(&z.re).add(&z.im.mul(&z.im))
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesIdentity {
    pub x: f64,
    pub y: f64,
    pub terms: usize,
    /// `|F(x+iy)|²`.
    pub lhs: EstimatedValue,
    /// `Σ_{n≤N} L_n(x) y^{2n}`.
    pub partial: EstimatedValue,
    pub residual: f64,
    /// `10 |L_N(x)| y^{2N}`.
    pub next_term_heuristic: f64,
    pub within_heuristic: bool,
}

/// Compares `|F(x+iy)|²` with the truncated series `Σ_{n≤N} L_n(x) y^{2n}`.
pub fn series_identity_check<S: DerivativeSource + ?Sized>(src: &S, x: f64, y: f64, terms: usize) -> Result<SeriesIdentity> {
    if terms > MAX_DERIVATIVE / 2 {
        return Err(Error::UnsupportedDerivativeOrder {
            order: 2 * terms,
            max: MAX_DERIVATIVE,
        });
    }
    let p = src.precision();
    let (rx, ry) = (p.real(x), p.real(y));
    let z = src.complex_derivatives(&rx, &ry, 0)?;
    let lhs = modulus_squared(&z[0]);
    let d = src.derivatives(&rx, 2 * terms)?;
    let y2 = ry.square();
    let mut partial = EstimatedValue::exact(p.zero());
    let mut yp = p.one();
    let mut last = p.zero();
    for n in 0..=terms {
        let ln = ln_from_derivatives(&d, n, p);
        last = ln.value.abs() * &yp;
        partial = partial.add(&ln.scale(&yp));
        yp *= &y2;
    }
    let residual = (&lhs.value - &partial.value).abs();
    let slack = &lhs.abs_error_bound + &partial.abs_error_bound;
    let heuristic = last * 10.0;
    Ok(SeriesIdentity {
        x,
        y,
        terms,
        within_heuristic: residual <= &heuristic + &slack,
        residual: residual.to_f64(),
        next_term_heuristic: heuristic.to_f64(),
        lhs,
        partial,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexLaguerre {
    pub x: f64,
    pub y: f64,
    /// `|F'(z)|² − Re(F(z) conj F''(z))`.
    pub expr: EstimatedValue,
    /// `½ ∂²_y |F(x+iy)|²` by finite differences in `y`.
    pub halfwave: EstimatedValue,
    pub relative_difference: f64,
}

/// Both sides of the complex Laguerre identity at `z = x + iy`.
pub fn complex_laguerre_check<S: DerivativeSource + ?Sized>(src: &S, x: f64, y: f64) -> Result<ComplexLaguerre> {
    let p = src.precision();
    let rx = p.real(x);
    let d = src.complex_derivatives(&rx, &p.real(y), 2)?;
    let expr = modulus_squared(&d[1]).sub(&d[0].re.mul(&d[2].re).add(&d[0].im.mul(&d[2].im)));
    let second = finite_difference_est(
        |v| Ok(modulus_squared(&src.complex_derivatives(&rx, v, 0)?[0])),
        &p.real(y),
        2,
        0.125,
    )?;
    let halfwave = second.scale(&p.real(0.5));
    let denom = expr.value.abs().max(halfwave.value.abs());
    let relative_difference = if denom.is_zero() {
        0.0
    } else {
        ((&expr.value - &halfwave.value).abs() / denom).to_f64()
    };
    Ok(ComplexLaguerre {
        x,
        y,
        expr,
        halfwave,
        relative_difference,
    })
}

/// `f(x) = C e^{−a x²} Π (x − x_k) Π ((x − α_j)² + β_j²)`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ZeroFactorization {
    pub constant: f64,
    pub a: f64,
    pub real_zeros: Vec<f64>,
    /// `(α_j, β_j)` for each conjugate pair `α_j ± iβ_j`.
    pub complex_pairs: Vec<(f64, f64)>,
}

impl ZeroFactorization {
    pub fn eval(&self, x: &Real) -> Real {
        let mut v = (x.square() * -self.a).exp() * self.constant;
        for &r in &self.real_zeros {
            v *= x - r;
        }
        for &(al, be) in &self.complex_pairs {
            v *= (x - al).square() + x.same_prec(be).square();
        }
        v
    }

    /// The same function as an [`ExpPoly`].
    pub fn to_exp_poly(&self, p: Precision) -> ExpPoly {
        let mut f = ExpPoly::new(p.real(-self.a), vec![p.real(self.constant)]);
        for &r in &self.real_zeros {
            f = f.mul(&ExpPoly::polynomial(vec![p.real(-r), p.one()], p), p);
        }
        for &(al, be) in &self.complex_pairs {
            let q = vec![p.real(al).square() + p.real(be).square(), p.real(-2.0 * al), p.one()];
            f = f.mul(&ExpPoly::polynomial(q, p), p);
        }
        f
    }
}

/// `L_1(x) = f(x)² {2a + Σ 1/(x−x_k)² + Σ 2((x−α_j)²−β_j²)/((x−α_j)²+β_j²)²}`.
pub fn laguerre_from_zeros(f: &ZeroFactorization, x: &Real) -> Result<Real> {
    let xf = x.to_f64();
    if f.real_zeros.contains(&xf) {
        return Err(Error::PoleAtZero { x: xf });
    }
    let mut bracket = x.same_prec(2.0 * f.a);
    for &r in &f.real_zeros {
        bracket += x.same_prec(1.0) / (x - r).square();
    }
    for &(al, be) in &f.complex_pairs {
        let u = (x - al).square();
        let b2 = x.same_prec(be).square();
        bracket += (&u - &b2) * 2.0 / (&u + &b2).square();
    }
    Ok(f.eval(x).square() * bracket)
}

/// Both sides of `L_1(α; f) = −2mβ^{4m−2} g(α)² + β^{4m} L_1(α; g)` for
/// `f = ((x−α)² + β²)^m g`.
#[derive(Clone, Debug, Serialize)]
pub struct PerturbationIdentity {
    pub alpha: f64,
    pub beta: f64,
    pub m: u32,
    pub g: Vec<f64>,
    pub lhs: EstimatedValue,
    pub rhs: EstimatedValue,
    pub relative_difference: f64,
}

pub fn perturbation_identity(alpha: f64, beta: f64, m: u32, g: &[f64], p: Precision) -> Result<PerturbationIdentity> {
    if m == 0 {
        return Err(Error::InvalidInput("multiplicity m must be at least 1".into()));
    }
    let gp = ExpPoly::polynomial(g.iter().map(|&c| p.real(c)).collect(), p);
    let q = ExpPoly::polynomial(vec![p.real(alpha).square() + p.real(beta).square(), p.real(-2.0 * alpha), p.one()], p);
    let mut f = gp.clone();
    for _ in 0..m {
        f = f.mul(&q, p);
    }
    let a = p.real(alpha);
    let lhs = laguerre_lp_chain(&ExpPolySource::new(f, p, "f"), 1, &a)?;
    let gsrc = ExpPolySource::new(gp.clone(), p, "g");
    let lg = laguerre_lp_chain(&gsrc, 1, &a)?;
    let b = p.real(beta);
    let ga = gp.eval(&a);
    let first = b.powi(4 * m as i32 - 2) * ga.square() * -(2.0 * f64::from(m));
    let b4m = b.powi(4 * m as i32);
    let rhs = EstimatedValue::new(first.clone(), first.abs() * p.epsilon() * 16.0)?.add(&lg.scale(&b4m));
    let denom = lhs.value.abs().max(rhs.value.abs());
    let relative_difference = if denom.is_zero() {
        0.0
    } else {
        ((&lhs.value - &rhs.value).abs() / denom).to_f64()
    };
    Ok(PerturbationIdentity {
        alpha,
        beta,
        m,
        g: g.to_vec(),
        lhs,
        rhs,
        relative_difference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelDescriptor;

    fn p() -> Precision {
        Precision::digits(40)
    }

    #[test]
    fn l0_is_square() {
        let src = ExpPolySource::gaussian_times_one_plus_square(p());
        let x = p().real(0.7);
        let l0 = laguerre_ln(&src, 0, &x).unwrap();
        let f = src.f.eval(&x);
        assert_eq!(l0.value, f.square());
    }

    #[test]
    fn counterexample_closed_form() {
        let p = p();
        let src = ExpPolySource::gaussian_times_one_plus_square(p);
        for x in [0.0, 0.5, 1.0, 2.0] {
            let rx = p.real(x);
            let l1 = laguerre_ln(&src, 1, &rx).unwrap();
            let expect = (rx.square() * -2.0).exp() * rx.square() * (rx.square() + 3.0) * 2.0;
            assert!((&l1.value - &expect).abs() < 1e-30, "x = {x}");
        }
    }

    #[test]
    fn chain_p1_is_l1() {
        let p = p();
        let src = ExpPolySource::gaussian_times_one_plus_square(p);
        let x = p.real(1.3);
        let a = laguerre_ln(&src, 1, &x).unwrap();
        let b = laguerre_lp_chain(&src, 1, &x).unwrap();
        assert!((&a.value - &b.value).abs() < 1e-35);
    }

    #[test]
    fn order_cap() {
        let src = ExpPolySource::gaussian_times_one_plus_square(p());
        let x = p().zero();
        assert!(matches!(
            laguerre_ln(&src, 5, &x),
            Err(Error::UnsupportedDerivativeOrder { .. })
        ));
        assert!(laguerre_lp_chain(&src, 8, &x).is_err());
    }

    #[test]
    fn pair_of_real_zeros() {
        let f = ZeroFactorization {
            constant: 1.0,
            a: 0.0,
            real_zeros: vec![-1.0, 1.0],
            complex_pairs: vec![],
        };
        let v = laguerre_from_zeros(&f, &p().zero()).unwrap();
        assert_eq!(v, 2.0);
        assert!(matches!(
            laguerre_from_zeros(&f, &p().one()),
            Err(Error::PoleAtZero { .. })
        ));
    }

    #[test]
    fn zeros_formula_matches_derivatives_with_complex_pairs() {
        let p = p();
        let f = ZeroFactorization {
            constant: 2.0,
            a: 0.3,
            real_zeros: vec![0.5, -2.0],
            complex_pairs: vec![(1.0, 0.5)],
        };
        let src = ExpPolySource::new(f.to_exp_poly(p), p, "fixture");
        let x = p.real(0.2);
        let a = laguerre_from_zeros(&f, &x).unwrap();
        let b = laguerre_ln(&src, 1, &x).unwrap();
        assert!(((&a - &b.value) / &a).abs() < 1e-30);
    }

    #[test]
    fn perturbation_identity_and_negativity() {
        let r = perturbation_identity(1.0, 0.1, 1, &[3.0, 0.0, 1.0], p()).unwrap();
        assert!(r.relative_difference < 1e-30);
        let r = perturbation_identity(1.0, 0.01, 1, &[3.0, 0.0, 1.0], p()).unwrap();
        assert!(r.lhs.certified_negative());
    }

    #[test]
    fn series_identity_at_real_axis() {
        let src = ExpPolySource::gaussian_times_one_plus_square(p());
        let r = series_identity_check(&src, 0.4, 0.0, 2).unwrap();
        assert!(r.residual < 1e-35);
    }

    #[test]
    fn complex_expression_reduces_to_l1_on_real_axis() {
        let p = p();
        let src = ExpPolySource::gaussian_times_one_plus_square(p);
        let c = complex_laguerre_check(&src, 0.8, 0.0).unwrap();
        let l1 = laguerre_ln(&src, 1, &p.real(0.8)).unwrap();
        assert!((&c.expr.value - &l1.value).abs() < 1e-35);
        assert!(c.relative_difference < 1e-10);
    }

    #[test]
    fn gaussian_transform_l1() {
        // F = (√π/2) e^{−x²/4}: L_1 = F² / 2.
        let cfg = QuadratureConfig::with_digits(30);
        let spec = TransformSpec::new(KernelDescriptor::gaussian());
        let x = cfg.precision.real(1.0);
        let l1 = laguerre_ln_derivative_route(&spec, 1, &x, &cfg).unwrap();
        let f = cfg.precision.pi().sqrt() / 2.0 * cfg.precision.real(-0.25).exp();
        let expect = f.square() / 2.0;
        assert!((&l1.value - &expect).abs() <= &l1.abs_error_bound + 1e-40);
    }
}
