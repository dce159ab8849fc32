//! Half-line cosine transforms `F(x) = ∫₀^∞ K(t) cos(xt) dt` of kernels,
//! with the heat-flow factor `e^{λt²}` and extra weight `t^{2m}` folded into
//! the kernel.
//!
//! Derivatives are taken under the integral sign:
//! `F^{(p)}(x) = ∫₀^∞ K(t) t^p cos(xt + pπ/2) dt`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{KernelDescriptor, KernelFamily, KernelFunction};
use crate::numerics::{
    bracket_zeros_sampled, finite_difference_est, integrate, integrate_half_line_vec,
    radius_from_log_envelope, EstimatedValue, QuadratureConfig, Real, Truncation,
    ZeroOptions, ZeroReport,
};

#[derive(Clone, Debug, PartialEq)]
pub struct TransformSpec {
    pub kernel: KernelDescriptor,
    /// `λ` of the integrand factor `e^{λt²}`.
    pub heat_lambda: f64,
    /// `m` of the integrand factor `t^{2m}`.
    pub extra_power: u32,
}

impl TransformSpec {
    pub fn new(kernel: KernelDescriptor) -> Self {
        TransformSpec {
            kernel,
            heat_lambda: 0.0,
            extra_power: 0,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.heat_lambda = lambda;
        self
    }

    pub fn with_extra_power(mut self, m: u32) -> Self {
        self.extra_power = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.heat_lambda.is_finite() {
            return Err(Error::InvalidInput(format!("lambda = {}", self.heat_lambda)));
        }
        match (&self.kernel.family, self.heat_lambda) {
            (KernelFamily::GaussianPoly(_), l) if l >= 1.0 => Err(Error::InvalidInput(format!(
                "a Gaussian-type kernel needs lambda < 1, got {l}"
            ))),
            _ => Ok(()),
        }
    }

    /// `K(t) e^{λt²} t^{2m}` at `t ≥ 0`.
    pub fn integrand_weight(&self, t: &Real) -> Result<Real> {
        let mut v = self.kernel.eval(t, 0)?.value;
        if self.heat_lambda != 0.0 {
            v *= (t.square() * self.heat_lambda).exp();
        }
        if self.extra_power > 0 {
            v *= t.powi(2 * self.extra_power as i32);
        }
        Ok(v)
    }

    /// Log-envelope of `|K(t) e^{λt²} t^{2m+p}| e^{|y| t}`.
    fn log_envelope(&self, t: f64, p: usize, y: f64) -> f64 {
        let pow = 2.0 * f64::from(self.extra_power) + p as f64;
        self.kernel.log_envelope(t) + self.heat_lambda * t * t + pow * t.max(1.0).ln() + y.abs() * t
    }

    /// Truncation for transforms up to derivative order `p_max` at
    /// imaginary part `y`, aiming the tail at `cfg.abs_tol / 10`.
    pub fn truncation(&self, p_max: usize, y: f64, cfg: &QuadratureConfig) -> Result<Truncation> {
        if !(cfg.abs_tol > 0.0) {
            return Err(Error::InvalidInput(
                "transforms need abs_tol > 0 for truncation".into(),
            ));
        }
        let ln_target = (cfg.abs_tol / 10.0).ln();
        let (radius, ln_tail) =
            radius_from_log_envelope(|t| self.log_envelope(t, p_max, y), 0.0, ln_target).map_err(
                |e| match e {
                    Error::InvalidDecayBound(m) if y != 0.0 => Error::TailDominated(m),
                    other => other,
                },
            )?;
        Ok(Truncation::Radius {
            radius,
            tail_bound: cfg.precision.real(ln_tail).exp(),
        })
    }
}

impl std::fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.kernel)?;
        if self.heat_lambda != 0.0 {
            write!(f, ";lambda={}", self.heat_lambda)?;
        }
        if self.extra_power != 0 {
            write!(f, ";m={}", self.extra_power)?;
        }
        Ok(())
    }
}

/// `cos(a + pπ/2)` from `(sin a, cos a)`.
fn phase_cos(p: usize, s: &Real, c: &Real) -> Real {
    match p % 4 {
        0 => c.clone(),
        1 => -s,
        2 => -c,
        _ => s.clone(),
    }
}

/// `sin(a + pπ/2)` from `(sin a, cos a)`.
fn phase_sin(p: usize, s: &Real, c: &Real) -> Real {
    match p % 4 {
        0 => s.clone(),
        1 => c.clone(),
        2 => -s,
        _ => -c,
    }
}

/// `F^{(p)}(x)` for every `p` in `0..=p_max`, sharing kernel evaluations.
pub fn transform_derivatives(
    spec: &TransformSpec,
    x: &Real,
    p_max: usize,
    cfg: &QuadratureConfig,
) -> Result<Vec<EstimatedValue>> {
    spec.validate()?;
    let cfg = cfg
        .clone()
        .with_truncation(spec.truncation(p_max, 0.0, cfg)?)
        .with_frequency(x.to_f64());
    integrate_half_line_vec(
        |t| {
            let w = spec.integrand_weight(t)?;
            let (s, c) = (x * t).sin_cos();
            let mut tp = t.zero_like() + 1.0;
            let mut out = Vec::with_capacity(p_max + 1);
            for p in 0..=p_max {
                out.push(&w * &tp * phase_cos(p, &s, &c));
                tp *= t;
            }
            Ok(out)
        },
        p_max + 1,
        &cfg,
    )
}

/// `F^{(p)}(x)`.
pub fn transform_eval(spec: &TransformSpec, x: &Real, p: usize, cfg: &QuadratureConfig) -> Result<EstimatedValue> {
    let mut all = transform_derivatives_only(spec, x, p, cfg)?;
    Ok(all.pop().expect("one value"))
}

/// Only the order-`p` derivative (cheaper than all orders up to `p`).
fn transform_derivatives_only(
    spec: &TransformSpec,
    x: &Real,
    p: usize,
    cfg: &QuadratureConfig,
) -> Result<Vec<EstimatedValue>> {
    spec.validate()?;
    let cfg = cfg
        .clone()
        .with_truncation(spec.truncation(p, 0.0, cfg)?)
        .with_frequency(x.to_f64());
    integrate_half_line_vec(
        |t| {
            let w = spec.integrand_weight(t)?;
            let (s, c) = (x * t).sin_cos();
            Ok(vec![w * t.powi(p as i32) * phase_cos(p, &s, &c)])
        },
        1,
        &cfg,
    )
}

/// Real and imaginary parts of a complex value.
#[derive(Clone, Debug, Serialize)]
pub struct ComplexValue {
    pub re: EstimatedValue,
    pub im: EstimatedValue,
}

/// `F^{(p)}(x + iy)` for `p` in `0..=p_max`, from
/// `cos((x+iy)t + pπ/2) = cos(a) cosh(yt) − i sin(a) sinh(yt)`, `a = xt + pπ/2`.
pub fn transform_complex_derivatives(
    spec: &TransformSpec,
    x: &Real,
    y: &Real,
    p_max: usize,
    cfg: &QuadratureConfig,
) -> Result<Vec<ComplexValue>> {
    spec.validate()?;
    let cfg = cfg
        .clone()
        .with_truncation(spec.truncation(p_max, y.to_f64(), cfg)?)
        .with_frequency(x.to_f64());
    let parts = integrate_half_line_vec(
        |t| {
            let w = spec.integrand_weight(t)?;
            let (s, c) = (x * t).sin_cos();
            let (sh, ch) = (y * t).sinh_cosh();
            let mut tp = t.zero_like() + 1.0;
            let mut out = Vec::with_capacity(2 * (p_max + 1));
            for p in 0..=p_max {
                let wt = &w * &tp;
                out.push(&wt * phase_cos(p, &s, &c) * &ch);
                out.push(-(&wt * phase_sin(p, &s, &c) * &sh));
                tp *= t;
            }
            Ok(out)
        },
        2 * (p_max + 1),
        &cfg,
    )?;
    Ok(parts
        .chunks(2)
        .map(|c| ComplexValue {
            re: c[0].clone(),
            im: c[1].clone(),
        })
        .collect())
}

/// `F(x + iy)`.
pub fn transform_complex(spec: &TransformSpec, x: &Real, y: &Real, cfg: &QuadratureConfig) -> Result<ComplexValue> {
    Ok(transform_complex_derivatives(spec, x, y, 0, cfg)?.swap_remove(0))
}

/// Zeros of `x ↦ F(x)` on a grid, refined by bisection. A zero is simple
/// when `|F'|` exceeds 10 times its bound there.
pub fn real_zero_scan(
    spec: &TransformSpec,
    interval: (f64, f64),
    n_grid: usize,
    cfg: &QuadratureConfig,
) -> Result<ZeroReport> {
    let p = cfg.precision;
    let opts = ZeroOptions {
        simplicity_factor: 10.0,
        precision: p,
        ..ZeroOptions::default()
    };
    bracket_zeros_sampled(
        |grid| {
            Ok(transform_grid_derivatives(spec, grid, 0, cfg)?
                .into_iter()
                .map(|mut v| v.swap_remove(0).value)
                .collect())
        },
        |x| Ok(transform_eval(spec, &p.real(x), 0, cfg)?.value),
        |x| transform_eval(spec, &p.real(x), 1, cfg),
        interval,
        n_grid,
        &opts,
    )
}

/// `∫₀^∞ K(u) sin(ut)/u du`, which equals `∫₀^t F(v) dv`.
pub fn average_positivity(spec: &TransformSpec, t: f64, cfg: &QuadratureConfig) -> Result<EstimatedValue> {
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("average needs t > 0, got {t}")));
    }
    spec.validate()?;
    let p = cfg.precision;
    let rt = p.real(t);
    let cfg = cfg
        .clone()
        .with_truncation(spec.truncation(0, 0.0, cfg)?)
        .with_frequency(t);
    let mut r = integrate_half_line_vec(
        |u| {
            let w = spec.integrand_weight(u)?;
            let sinc = if u.is_zero() {
                rt.clone()
            } else {
                (u * &rt).sin() / u
            };
            Ok(vec![w * sinc])
        },
        1,
        &cfg,
    )?;
    Ok(r.pop().expect("one value"))
}

/// Residual of the backward heat equation `∂H_λ/∂λ = −∂²H_λ/∂x²`, with both
/// sides taken by finite differences of directly evaluated `H_λ(x)`.
#[derive(Clone, Debug, Serialize)]
pub struct HeatCheck {
    pub lambda: f64,
    pub x: f64,
    pub d_lambda: EstimatedValue,
    pub d_xx: EstimatedValue,
    /// `|∂_λ H + ∂_xx H| / max(|∂_λ H|, |∂_xx H|)`.
    pub relative_residual: f64,
}

pub fn heat_equation_check(spec: &TransformSpec, lambda: f64, x: f64, cfg: &QuadratureConfig) -> Result<HeatCheck> {
    let p = cfg.precision;
    let rx = p.real(x);
    let d_lambda = finite_difference_est(
        |l| {
            let s = spec.clone().with_lambda(l.to_f64());
            transform_eval(&s, &rx, 0, cfg)
        },
        &p.real(lambda),
        1,
        1.0 / 64.0,
    )?;
    let at_lambda = spec.clone().with_lambda(lambda);
    let d_xx = finite_difference_est(|u| transform_eval(&at_lambda, u, 0, cfg), &rx, 2, 1.0 / 8.0)?;
    let sum = d_lambda.add(&d_xx);
    let denom = d_lambda.value.abs().max(d_xx.value.abs());
    Ok(HeatCheck {
        lambda,
        x,
        relative_residual: (sum.value.abs() / denom).to_f64(),
        d_lambda,
        d_xx,
    })
}

/// Grid points per joint quadrature in [`transform_grid_derivatives`].
const GRID_CHUNK: usize = 200;

/// `F^{(p)}(x)` for `p` in `0..=p_max` at every `x` in `xs`. Points are
/// processed in chunks that share kernel evaluations; chunks run in parallel.
/// Result is indexed `[point][order]`.
pub fn transform_grid_derivatives(
    spec: &TransformSpec,
    xs: &[f64],
    p_max: usize,
    cfg: &QuadratureConfig,
) -> Result<Vec<Vec<EstimatedValue>>> {
    spec.validate()?;
    let trunc = spec.truncation(p_max, 0.0, cfg)?;
    let prec = cfg.precision;
    let chunks = xs
        .par_chunks(GRID_CHUNK)
        .map(|chunk| {
            let omega = chunk.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let cfg = cfg.clone().with_truncation(trunc.clone()).with_frequency(omega);
            let rx: Vec<Real> = chunk.iter().map(|&x| prec.real(x)).collect();
            let flat = integrate_half_line_vec(
                |t| {
                    let w = spec.integrand_weight(t)?;
                    let mut wt = Vec::with_capacity(p_max + 1);
                    let mut tp = w;
                    for _ in 0..=p_max {
                        wt.push(tp.clone());
                        tp *= t;
                    }
                    let mut out = Vec::with_capacity(rx.len() * (p_max + 1));
                    for x in &rx {
                        let (s, c) = (x * t).sin_cos();
                        for (p, w) in wt.iter().enumerate() {
                            out.push(w * phase_cos(p, &s, &c));
                        }
                    }
                    Ok(out)
                },
                rx.len() * (p_max + 1),
                &cfg,
            )?;
            Ok(flat.chunks(p_max + 1).map(<[_]>::to_vec).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Values `F^{(p)}(x)` on a grid.
pub fn transform_grid(
    spec: &TransformSpec,
    xs: &[f64],
    p: usize,
    cfg: &QuadratureConfig,
) -> Result<Vec<EstimatedValue>> {
    Ok(transform_grid_derivatives(spec, xs, p, cfg)?
        .into_iter()
        .map(|mut v| v.swap_remove(p))
        .collect())
}

/// `∫₀^t F(v) dv` by outer quadrature of directly evaluated transforms, the
/// other side of the identity behind [`average_positivity`].
pub fn integrated_transform(spec: &TransformSpec, t: f64, cfg: &QuadratureConfig) -> Result<EstimatedValue> {
    let outer = QuadratureConfig {
        truncation: Truncation::DecayBound { c: 1.0, eps: 0.0 },
        ..cfg.clone()
    };
    let inner_bound = std::cell::RefCell::new(cfg.precision.zero());
    let r = integrate(
        |v| {
            let f = transform_eval(spec, v, 0, cfg)?;
            let mut b = inner_bound.borrow_mut();
            if f.abs_error_bound > *b {
                *b = f.abs_error_bound.clone();
            }
            Ok(f.value)
        },
        0.0,
        t,
        &outer,
    )?;
    let b = inner_bound.into_inner();
    Ok(r.with_extra_bound(&(b * t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Precision;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::with_digits(30)
    }

    #[test]
    fn gaussian_closed_form() {
        let c = cfg();
        let p = c.precision;
        let spec = TransformSpec::new(KernelDescriptor::gaussian());
        let v = transform_eval(&spec, &p.real(2.0), 0, &c).unwrap();
        let exact = p.pi().sqrt() / 2.0 * p.real(-1.0).exp();
        assert!((&v.value - &exact).abs() <= v.abs_error_bound);
        assert!(v.abs_error_bound < 1e-24);
    }

    #[test]
    fn theta_odd_derivative_vanishes_at_zero() {
        let c = cfg();
        let spec = TransformSpec::new(KernelDescriptor::theta());
        let v = transform_eval(&spec, &c.precision.zero(), 1, &c).unwrap();
        assert!(v.value.abs() <= v.abs_error_bound);
    }

    #[test]
    fn real_axis_complex_value_has_zero_imaginary_part() {
        let c = cfg();
        let p = c.precision;
        let spec = TransformSpec::new(KernelDescriptor::example_312());
        let z = transform_complex(&spec, &p.real(1.5), &p.zero(), &c).unwrap();
        assert!(z.im.value.is_zero());
        let f = transform_eval(&spec, &p.real(1.5), 0, &c).unwrap();
        assert!(z.re.agrees_with(&f, 0.0));
    }

    #[test]
    fn gaussian_lambda_must_stay_below_one() {
        let spec = TransformSpec::new(KernelDescriptor::gaussian()).with_lambda(1.0);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn phase_tables_agree_with_shifted_trig() {
        let p = Precision::DEFAULT;
        let a = p.real(0.3);
        let (s, c) = a.sin_cos();
        for k in 0..8 {
            let shifted = &a + p.pi() * (k as f64 / 2.0);
            assert!((phase_cos(k, &s, &c) - shifted.cos()).abs() < 1e-28);
            assert!((phase_sin(k, &s, &c) - shifted.sin()).abs() < 1e-28);
        }
    }

    #[test]
    fn example_kernel_transform_shape() {
        let c = cfg();
        let p = c.precision;
        let spec = TransformSpec::new(KernelDescriptor::example_312());
        let f0 = transform_eval(&spec, &p.zero(), 0, &c).unwrap().value;
        for x in [1.0f64, 2.0, 5.0] {
            let f = transform_eval(&spec, &p.real(x), 0, &c).unwrap().value;
            let ratio = (f / &f0 * p.real(x * x / 4.0).exp()).to_f64();
            let shape = (260.0 - 16.0 * x * x + x.powi(4)) / 260.0;
            assert!((ratio - shape).abs() < 1e-12 * shape.abs(), "x = {x}");
        }
    }

    #[test]
    fn evenness_in_x() {
        let c = cfg();
        let p = c.precision;
        let spec = TransformSpec::new(KernelDescriptor::theta());
        let a = transform_eval(&spec, &p.real(3.5), 0, &c).unwrap();
        let b = transform_eval(&spec, &p.real(-3.5), 0, &c).unwrap();
        assert!(a.agrees_with(&b, 0.0));
    }

    #[test]
    fn first_derivative_matches_finite_difference() {
        let c = cfg();
        let p = c.precision;
        let spec = TransformSpec::new(KernelDescriptor::example_312());
        let x = p.real(3.0);
        let d = transform_eval(&spec, &x, 1, &c).unwrap();
        let fd = finite_difference_est(|u| transform_eval(&spec, u, 0, &c), &x, 1, 0.25).unwrap();
        assert!(d.agrees_with(&fd, 0.0), "{d:?} vs {fd:?}");
    }

    #[test]
    fn conjugate_symmetry() {
        let c = cfg();
        let p = c.precision;
        let spec = TransformSpec::new(KernelDescriptor::theta());
        let up = transform_complex(&spec, &p.real(2.0), &p.real(0.7), &c).unwrap();
        let down = transform_complex(&spec, &p.real(2.0), &p.real(-0.7), &c).unwrap();
        assert_eq!(up.re.value, down.re.value);
        assert_eq!(up.im.value, -down.im.value);
    }

    #[test]
    fn grid_matches_pointwise() {
        let c = cfg();
        let p = c.precision;
        let spec = TransformSpec::new(KernelDescriptor::theta()).with_lambda(0.1);
        let xs = [0.0, 4.0, 9.5];
        let g = transform_grid_derivatives(&spec, &xs, 2, &c).unwrap();
        for (x, row) in xs.iter().zip(&g) {
            for (k, v) in row.iter().enumerate() {
                let direct = transform_eval(&spec, &p.real(*x), k, &c).unwrap();
                assert!(v.agrees_with(&direct, 0.0), "x = {x}, p = {k}");
            }
        }
    }

    #[test]
    fn average_matches_small_t_expansion() {
        let c = cfg();
        let p = c.precision;
        let spec = TransformSpec::new(KernelDescriptor::theta());
        let t = 1e-3;
        let a = average_positivity(&spec, t, &c).unwrap();
        let h0 = transform_eval(&spec, &p.zero(), 0, &c).unwrap();
        let rel = (a.value_f64() - t * h0.value_f64()).abs() / (t * h0.value_f64());
        assert!(rel < 0.01);
        assert!(a.certified_positive());
    }
}
