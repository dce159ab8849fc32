//! Adaptive panel quadrature at configurable precision.
//!
//! Each panel is integrated with a nested Clenshaw–Curtis pair (33 points and
//! its 17-point even-index subset); the difference of the two estimates is the
//! panel error. Panels whose error exceeds their share of the tolerance are
//! bisected until the total error meets the target.
//!
//! Half-line integrals are truncated at a radius chosen by a
//! [`Truncation`] policy, and the tail bound is added to the reported error.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;

use super::estimate::EstimatedValue;
use super::real::{Precision, Real};
use crate::error::{Error, Result};

/// Degree of the high-order Clenshaw–Curtis rule; the low rule has half of it.
const CC_N: usize = 32;

/// Largest radius a decay-bound truncation may pick.
const MAX_RADIUS: f64 = 1.0e4;

/// Product of frequency and radius above which panel widths are capped at
/// half an oscillation period.
const OSCILLATION_THRESHOLD: f64 = 50.0;

/// How a half-line integral is cut to a finite interval.
#[derive(Clone, Debug, PartialEq)]
pub enum Truncation {
    /// `|f(t)| <= c * exp(-t^(2+eps))` for all t. The radius is the smallest R
    /// with `c * exp(-R^(2+eps)) * (1+R) < abs_tol / 10`.
    DecayBound { c: f64, eps: f64 },
    /// Fixed radius with a caller-supplied bound on the discarded tail.
    Radius { radius: f64, tail_bound: Real },
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    /// Absolute tolerance. Zero requests relative-only convergence.
    pub abs_tol: f64,
    pub max_panels: usize,
    pub truncation: Truncation,
    pub precision: Precision,
    /// Largest angular frequency present in the integrand, if oscillatory.
    pub frequency: Option<f64>,
    /// Points where panels must start, e.g. around a peak of the integrand.
    pub breakpoints: Vec<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-20,
            abs_tol: 1e-25,
            max_panels: 4000,
            truncation: Truncation::DecayBound { c: 1.0, eps: 0.0 },
            precision: Precision::DEFAULT,
            frequency: None,
            breakpoints: Vec::new(),
        }
    }
}

/// Correctly rounded `10^e`; `powi` can be off by an ulp.
fn pow10(e: i32) -> f64 {
    format!("1e{e}").parse().expect("valid float literal")
}

impl QuadratureConfig {
    /// Config at `digits` precision with tolerances just above the rounding
    /// level: `rel_tol = 10^-(digits-5)`, `abs_tol = 10^-(digits-2)`.
    pub fn with_digits(digits: u32) -> Self {
        let d = digits as i32;
        QuadratureConfig {
            rel_tol: pow10(-(d - 5)),
            abs_tol: pow10(-(d - 2)),
            precision: Precision::digits(digits),
            ..QuadratureConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerances must be positive (rel {}, abs {})",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_panels < 1 {
            return Err(Error::InvalidInput("max_panels must be >= 1".into()));
        }
        if self.precision.decimal_digits() < 15 {
            return Err(Error::InvalidInput(format!(
                "precision_digits must be >= 15, got {}",
                self.precision.decimal_digits()
            )));
        }
        Ok(())
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn with_frequency(mut self, frequency: f64) -> Self {
        self.frequency = Some(frequency.abs());
        self
    }

    pub fn with_breakpoints(mut self, breakpoints: Vec<f64>) -> Self {
        self.breakpoints = breakpoints;
        self
    }

    /// Resolves the truncation policy to `(radius, tail_bound)`.
    pub fn truncation_radius(&self) -> Result<(f64, Real)> {
        let p = self.precision;
        match &self.truncation {
            Truncation::Radius { radius, tail_bound } => {
                if !(*radius > 0.0) || !radius.is_finite() {
                    return Err(Error::InvalidInput(format!("radius {radius}")));
                }
                Ok((*radius, tail_bound.abs()))
            }
            Truncation::DecayBound { c, eps } => decay_radius(*c, *eps, self.abs_tol, p),
        }
    }
}

fn decay_radius(c: f64, eps: f64, abs_tol: f64, p: Precision) -> Result<(f64, Real)> {
    if !(c > 0.0) || !(eps >= 0.0) || !c.is_finite() || !eps.is_finite() {
        return Err(Error::InvalidDecayBound(format!("c = {c}, eps = {eps}")));
    }
    if !(abs_tol > 0.0) {
        return Err(Error::InvalidDecayBound(
            "a decay bound needs abs_tol > 0".into(),
        ));
    }
    let ln_target = (abs_tol / 10.0).ln();
    let ln_env = |r: f64| c.ln() - r.powf(2.0 + eps) + (1.0 + r).ln();
    if ln_env(MAX_RADIUS) >= ln_target {
        return Err(Error::InvalidDecayBound(format!(
            "tail exceeds {abs_tol:e} at the maximum radius {MAX_RADIUS}"
        )));
    }
    // ln_env is decreasing for r >= 1; search from there.
    let (mut lo, mut hi) = (0.0, 1.0);
    while ln_env(hi) >= ln_target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ln_env(mid) >= ln_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tail = p.real(ln_env(hi)).exp();
    Ok((hi, tail))
}

/// Radius and tail bound from the log of a majorant `E` of `|f|`.
///
/// `log_env` must be concave and decreasing on `[start, inf)`. Returns the
/// smallest R (to bisection accuracy) with `E(R)/kappa <= exp(ln_target)`,
/// where `kappa` is minus the secant slope of `log_env` over `[R - delta, R]`;
/// concavity makes `E(R)/kappa` a bound on the tail integral. The second
/// component is the natural log of that bound.
pub fn radius_from_log_envelope(
    log_env: impl Fn(f64) -> f64,
    start: f64,
    ln_target: f64,
) -> Result<(f64, f64)> {
    let ln_tail = |r: f64| {
        let delta = 1e-3 * (1.0 + r.abs());
        let slope = (log_env(r) - log_env(r - delta)) / delta;
        if slope < 0.0 {
            log_env(r) - (-slope).ln()
        } else {
            f64::INFINITY
        }
    };
    let mut step = 0.25;
    let mut lo = start;
    let mut hi = start + step;
    while !(ln_tail(hi) <= ln_target) {
        lo = hi;
        step *= 2.0;
        hi = start + step;
        if hi > MAX_RADIUS {
            return Err(Error::InvalidDecayBound(format!(
                "envelope does not fall below e^{ln_target:.1} before radius {MAX_RADIUS}"
            )));
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ln_tail(mid) <= ln_target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((hi, ln_tail(hi)))
}

/// Clenshaw–Curtis nodes on [-1, 1] with high and embedded low weights.
pub(crate) struct CcRule {
    pub(crate) nodes: Vec<Real>,
    pub(crate) w_high: Vec<Real>,
    /// Weights for the even-indexed nodes (the degree-16 rule).
    pub(crate) w_low: Vec<Real>,
}

static CC_CACHE: Lazy<Mutex<HashMap<u32, Arc<CcRule>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

pub(crate) fn cc_rule(p: Precision) -> Arc<CcRule> {
    let mut cache = CC_CACHE.lock().expect("cc cache poisoned");
    cache
        .entry(p.bits())
        .or_insert_with(|| Arc::new(build_cc(p)))
        .clone()
}

fn cc_weights(n: usize, p: Precision) -> Vec<Real> {
    let pi = p.pi();
    let mut w = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut s = p.one();
        for k in 1..=n / 2 {
            let b = if 2 * k == n { 1.0 } else { 2.0 };
            let theta = &pi * (2 * k * j) as f64 / n as f64;
            s -= theta.cos() * b / ((4 * k * k - 1) as f64);
        }
        let c = if j == 0 || j == n { 1.0 } else { 2.0 };
        w.push(s * c / n as f64);
    }
    w
}

fn build_cc(p: Precision) -> CcRule {
    let pi = p.pi();
    let nodes = (0..=CC_N)
        .map(|j| (&pi * j as f64 / CC_N as f64).cos())
        .collect();
    CcRule {
        nodes,
        w_high: cc_weights(CC_N, p),
        w_low: cc_weights(CC_N / 2, p),
    }
}

/// Per-panel result for an integrand with `dim` components.
struct Panel {
    a: f64,
    b: f64,
    high: Vec<Real>,
    err: Vec<Real>,
    abs_mass: Vec<Real>,
}

fn eval_panel<F>(f: &F, a: f64, b: f64, dim: usize, rule: &CcRule, p: Precision) -> Result<Panel>
where
    F: Fn(&Real) -> Result<Vec<Real>>,
{
    let ra = p.real(a);
    let half = (p.real(b) - &ra) / 2.0;
    let mid = &ra + &half;
    let mut high = vec![p.zero(); dim];
    let mut low = vec![p.zero(); dim];
    let mut abs_mass = vec![p.zero(); dim];
    for (j, x) in rule.nodes.iter().enumerate() {
        let t = &mid + &half * x;
        let v = f(&t)?;
        if v.len() != dim {
            return Err(Error::InvalidInput(format!(
                "integrand returned {} components, expected {dim}",
                v.len()
            )));
        }
        for (i, vi) in v.iter().enumerate() {
            if !vi.is_finite() {
                return Err(Error::NonFinite(format!("integrand at t = {}", t.to_f64())));
            }
            let wh = vi * &rule.w_high[j];
            abs_mass[i] += wh.abs();
            high[i] += &wh;
            if j % 2 == 0 {
                low[i] += vi * &rule.w_low[j / 2];
            }
        }
    }
    let scale = half.abs();
    let err = high
        .iter()
        .zip(&low)
        .map(|(h, l)| (h - l).abs() * &scale)
        .collect();
    Ok(Panel {
        a,
        b,
        high: high.into_iter().map(|h| h * &scale).collect(),
        err,
        abs_mass: abs_mass.into_iter().map(|m| m * &scale).collect(),
    })
}

/// Natural log of `num / den`, tolerating zeros (`-inf` / `+inf`).
fn ln_ratio(num: &Real, den: &Real) -> f64 {
    num.ln_abs_f64() - den.ln_abs_f64()
}

/// Integrates a vector-valued `f` over `[a, b]` without tail handling.
/// All components share the node evaluations.
pub fn integrate_vec<F>(f: F, dim: usize, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Vec<EstimatedValue>>
where
    F: Fn(&Real) -> Result<Vec<Real>>,
{
    cfg.validate()?;
    if dim == 0 {
        return Ok(Vec::new());
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!("interval [{a}, {b}]")));
    }
    let p = cfg.precision;
    if a == b {
        return Ok(vec![EstimatedValue::exact(p.zero()); dim]);
    }
    if b < a {
        let r = integrate_vec(f, dim, b, a, cfg)?;
        return Ok(r.iter().map(EstimatedValue::neg).collect());
    }
    let rule = cc_rule(p);
    let mut cuts: Vec<f64> = vec![a];
    let mut bps: Vec<f64> = cfg
        .breakpoints
        .iter()
        .copied()
        .filter(|x| *x > a && *x < b)
        .collect();
    bps.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    bps.dedup();
    cuts.extend(bps);
    cuts.push(b);
    let max_width = match cfg.frequency {
        Some(w) if w * (b - a) > OSCILLATION_THRESHOLD => std::f64::consts::PI / w,
        _ => f64::INFINITY,
    };
    let mut spans = Vec::new();
    for win in cuts.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        let pieces = ((hi - lo) / max_width).ceil().max(1.0) as usize;
        for k in 0..pieces {
            let x0 = lo + (hi - lo) * k as f64 / pieces as f64;
            let x1 = if k + 1 == pieces {
                hi
            } else {
                lo + (hi - lo) * (k + 1) as f64 / pieces as f64
            };
            spans.push((x0, x1));
        }
    }
    if spans.len() > cfg.max_panels {
        return Err(Error::NonConvergence {
            panels: spans.len(),
            achieved: f64::INFINITY,
            target: cfg.abs_tol,
        });
    }
    let mut panels = spans
        .into_iter()
        .map(|(x0, x1)| eval_panel(&f, x0, x1, dim, &rule, p))
        .collect::<Result<Vec<_>>>()?;

    let round_eps = p.real(10f64).powi(-(p.decimal_digits() as i32)) * 10.0;
    loop {
        let mut total = vec![p.zero(); dim];
        let mut err = vec![p.zero(); dim];
        let mut mass = vec![p.zero(); dim];
        for pn in &panels {
            for i in 0..dim {
                total[i] += &pn.high[i];
                err[i] += &pn.err[i];
                mass[i] += &pn.abs_mass[i];
            }
        }
        let floor: Vec<Real> = mass.iter().map(|m| m * &round_eps).collect();
        let target: Vec<Real> = (0..dim)
            .map(|i| {
                p.real(cfg.abs_tol)
                    .max(total[i].abs() * cfg.rel_tol)
                    .max(floor[i].clone())
            })
            .collect();
        let converged = (0..dim).all(|i| err[i] <= target[i]);
        if converged {
            return (0..dim)
                .map(|i| EstimatedValue::new(total[i].clone(), &err[i] + &floor[i]))
                .collect();
        }
        // Split panels whose normalized error exceeds their share of the
        // budget, always including the worst one.
        let n = panels.len() as f64;
        let scores: Vec<f64> = panels
            .iter()
            .map(|pn| {
                (0..dim)
                    .map(|i| ln_ratio(&pn.err[i], &target[i]))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let worst = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let share = -n.ln();
        let mut next = Vec::with_capacity(panels.len() + 8);
        let mut split_any = false;
        for (pn, s) in panels.into_iter().zip(&scores) {
            if *s >= share.min(worst) && pn.b - pn.a > 1e-12 * (1.0 + pn.a.abs()) {
                let m = 0.5 * (pn.a + pn.b);
                next.push(eval_panel(&f, pn.a, m, dim, &rule, p)?);
                next.push(eval_panel(&f, m, pn.b, dim, &rule, p)?);
                split_any = true;
            } else {
                next.push(pn);
            }
        }
        if !split_any || next.len() > cfg.max_panels {
            let achieved = (0..dim)
                .map(|i| err[i].to_f64())
                .fold(0.0, f64::max);
            let tgt = (0..dim).map(|i| target[i].to_f64()).fold(f64::INFINITY, f64::min);
            return Err(Error::NonConvergence {
                panels: next.len(),
                achieved,
                target: tgt,
            });
        }
        panels = next;
    }
}

/// Scalar integral over a finite interval.
pub fn integrate<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<EstimatedValue>
where
    F: Fn(&Real) -> Result<Real>,
{
    let mut r = integrate_vec(|t| Ok(vec![f(t)?]), 1, a, b, cfg)?;
    Ok(r.pop().expect("one component"))
}

/// Vector-valued integral over `[0, inf)`, truncated per `cfg.truncation`.
/// The tail bound is added to every component.
pub fn integrate_half_line_vec<F>(f: F, dim: usize, cfg: &QuadratureConfig) -> Result<Vec<EstimatedValue>>
where
    F: Fn(&Real) -> Result<Vec<Real>>,
{
    cfg.validate()?;
    let (radius, tail) = cfg.truncation_radius()?;
    let body = integrate_vec(f, dim, 0.0, radius, cfg)?;
    Ok(body.into_iter().map(|v| v.with_extra_bound(&tail)).collect())
}

/// `∫₀^∞ f(t) dt` with an error bound that includes the truncation tail.
pub fn integrate_half_line<F>(f: F, cfg: &QuadratureConfig) -> Result<EstimatedValue>
where
    F: Fn(&Real) -> Result<Real>,
{
    let mut r = integrate_half_line_vec(|t| Ok(vec![f(t)?]), 1, cfg)?;
    Ok(r.pop().expect("one component"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(t: &Real) -> Result<Real> {
        Ok((-t.square()).exp())
    }

    #[test]
    fn cc_weights_integrate_constants_and_even_powers() {
        let p = Precision::DEFAULT;
        let rule = cc_rule(p);
        let s: Real = rule.w_high.iter().sum();
        assert!((s - 2.0).abs() < 1e-30);
        let s_low: Real = rule.w_low.iter().sum();
        assert!((s_low - 2.0).abs() < 1e-30);
        // ∫ x^10 over [-1, 1] = 2/11, exact for both rules.
        let m: Real = rule
            .nodes
            .iter()
            .zip(&rule.w_high)
            .map(|(x, w)| x.powi(10) * w)
            .collect::<Vec<_>>()
            .iter()
            .sum();
        assert!((m - p.real(2.0) / 11.0).abs() < 1e-30);
    }

    #[test]
    fn gaussian_half_line() {
        let cfg = QuadratureConfig::default();
        let r = integrate_half_line(gauss, &cfg).unwrap();
        let exact = cfg.precision.pi().sqrt() / 2.0;
        let err = (&r.value - &exact).abs();
        assert!(err < 1e-12);
        assert!(err <= r.abs_error_bound);
    }

    #[test]
    fn zero_integrand() {
        let cfg = QuadratureConfig::default();
        let r = integrate_half_line(|t| Ok(t.zero_like()), &cfg).unwrap();
        assert!(r.value.is_zero());
        assert!(r.abs_error_bound <= cfg.abs_tol);
    }

    #[test]
    fn decay_radius_matches_definition() {
        let cfg = QuadratureConfig::default();
        let (r, tail) = cfg.truncation_radius().unwrap();
        let env = |x: f64| (-x * x).exp() * (1.0 + x);
        assert!(env(r) < cfg.abs_tol / 10.0);
        assert!(env(r - 1e-6) >= cfg.abs_tol / 10.0 * 0.999);
        assert!(tail < cfg.abs_tol);
    }

    #[test]
    fn decay_bound_rejects_bad_parameters() {
        let cfg = QuadratureConfig::default().with_truncation(Truncation::DecayBound { c: -1.0, eps: 0.0 });
        assert_eq!(
            integrate_half_line(gauss, &cfg).unwrap_err().code(),
            "invalid_decay_bound"
        );
        let cfg = QuadratureConfig {
            abs_tol: 0.0,
            ..QuadratureConfig::default()
        };
        assert!(matches!(
            integrate_half_line(gauss, &cfg),
            Err(Error::InvalidDecayBound(_))
        ));
    }

    #[test]
    fn panel_budget_exhaustion_is_reported() {
        let cfg = QuadratureConfig {
            max_panels: 2,
            ..QuadratureConfig::default()
        };
        // Undeclared oscillation needs far more than two panels.
        let f = |t: &Real| Ok((t * 40.0).cos());
        let err = integrate(f, 0.0, 10.0, &cfg).unwrap_err();
        assert_eq!(err.code(), "non_convergence");
    }

    #[test]
    fn oscillatory_cosine_transform_of_gaussian() {
        let x = 40.0;
        let cfg = QuadratureConfig::default().with_frequency(x);
        let p = cfg.precision;
        let r = integrate_half_line(|t| Ok((-t.square()).exp() * (t * x).cos()), &cfg).unwrap();
        let exact = p.pi().sqrt() / 2.0 * p.real(-x * x / 4.0).exp();
        assert!((&r.value - &exact).abs() <= r.abs_error_bound);
    }

    #[test]
    fn relative_only_mode_handles_tiny_integrands() {
        let p = Precision::DEFAULT;
        let scale = p.real(-5000.0).exp();
        let cfg = QuadratureConfig {
            abs_tol: 0.0,
            ..QuadratureConfig::default()
        };
        let r = integrate(|t| Ok((-t.square()).exp() * &scale), 0.0, 1.0, &cfg).unwrap();
        // ∫₀¹ e^{-t²} dt = (√π/2) erf(1).
        let erf1 = p.parse("0.842700792949714869341220635082609259296").unwrap();
        let exact = p.pi().sqrt() / 2.0 * erf1 * &scale;
        let rel = ((&r.value - &exact) / &exact).abs();
        assert!(rel < 1e-24);
    }

    #[test]
    fn log_envelope_radius_bounds_tail() {
        // Envelope e^{-t²}: tail ∫_R^∞ e^{-t²} <= e^{-R²}/(2R).
        let (r, ln_tail) = radius_from_log_envelope(|t| -t * t, 0.0, -60.0).unwrap();
        assert!(ln_tail <= -60.0);
        assert!(-r * r - (2.0 * r).ln() <= ln_tail + 1e-6);
        assert!(r < 8.0);
    }

    #[test]
    fn vector_components_share_nodes() {
        let cfg = QuadratureConfig::default();
        let p = cfg.precision;
        let r = integrate_half_line_vec(
            |t| {
                let g = (-t.square()).exp();
                Ok(vec![g.clone(), &g * t.square()])
            },
            2,
            &cfg,
        )
        .unwrap();
        let s = p.pi().sqrt();
        assert!((&r[0].value - &s / 2.0).abs() <= r[0].abs_error_bound);
        assert!((&r[1].value - &s / 4.0).abs() <= r[1].abs_error_bound);
    }
}
