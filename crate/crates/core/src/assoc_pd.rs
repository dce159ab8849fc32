//! Associated kernels `K(t) = ∫_{−∞}^{∞} φ(s+t) φ(s−t) w(s,t) ds`, their
//! cosine transforms through a memoized node grid, and positive-definiteness
//! evidence: transform scans, Gram matrices, cosine probes and the sine
//! criterion built on `Ḡ(t) = ∫_t^∞ K(u) du`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use once_cell::sync::{Lazy, OnceCell};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{
    admissibility_report, log_concavity_check, AdmissibilityReport, ArgMap, KernelDescriptor, KernelFamily,
    KernelFunction, KernelJet, LogConcavityReport,
};
use crate::laguerre::{LaguerreProfile, Route, TransformSource};
use crate::numerics::linalg::min_eigenpair;
use crate::numerics::quadrature::cc_rule;
use crate::numerics::{
    bracket_zeros_sampled, integrate_half_line_vec, radius_from_log_envelope, EstimatedValue, Precision,
    QuadratureConfig, Real, Truncation, ZeroOptions, ZeroReport,
};
use crate::theta::closed_grid;
use crate::transform::transform_grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AssocWeight {
    /// `s^{2n}`.
    Power { n: u32 },
    /// `(s² − t²)^m s²`.
    Shifted { m: u32 },
}

impl AssocWeight {
    fn eval(&self, s: &Real, t: &Real) -> Real {
        match *self {
            AssocWeight::Power { n } => s.powi(2 * n as i32),
            AssocWeight::Shifted { m } => (s.square() - t.square()).powi(m as i32) * s.square(),
        }
    }

    /// `∂w/∂t`.
    fn dt(&self, s: &Real, t: &Real) -> Real {
        match *self {
            AssocWeight::Power { .. } => s.zero_like(),
            AssocWeight::Shifted { m: 0 } => s.zero_like(),
            AssocWeight::Shifted { m } => {
                (s.square() - t.square()).powi(m as i32 - 1) * s.square() * t * (-2.0 * f64::from(m))
            }
        }
    }

    /// Log of a majorant of `|w(s,t)|` for `s ≥ 0`.
    fn log_bound(&self, s: f64, t: f64) -> f64 {
        match *self {
            AssocWeight::Power { n } => 2.0 * f64::from(n) * s.max(1e-300).ln(),
            AssocWeight::Shifted { m } => f64::from(m) * (s * s + t * t).max(1e-300).ln() + 2.0 * s.max(1e-300).ln(),
        }
    }

    /// Polynomial degree of the weight in `s`.
    fn degree(&self) -> u32 {
        match *self {
            AssocWeight::Power { n } => 2 * n,
            AssocWeight::Shifted { m } => 2 * m + 2,
        }
    }
}

/// An associated kernel of `φ` with a given weight, evaluated by inner
/// quadrature at the precision and tolerances of `cfg`.
#[derive(Clone, Debug)]
pub struct AssocKernel {
    pub phi: KernelDescriptor,
    pub weight: AssocWeight,
    pub cfg: QuadratureConfig,
}

impl AssocKernel {
    pub fn new(phi: KernelDescriptor, n: u32, cfg: QuadratureConfig) -> Self {
        AssocKernel {
            phi,
            weight: AssocWeight::Power { n },
            cfg,
        }
    }

    pub fn shifted(phi: KernelDescriptor, m: u32, cfg: QuadratureConfig) -> Self {
        AssocKernel {
            phi,
            weight: AssocWeight::Shifted { m },
            cfg,
        }
    }

    pub fn n(&self) -> Option<u32> {
        match self.weight {
            AssocWeight::Power { n } => Some(n),
            AssocWeight::Shifted { .. } => None,
        }
    }

    /// Majorant of `|φ'(u)/φ(u)|` for `u ≥ 0`.
    fn log_rate(&self, u: f64) -> f64 {
        let theta_rate = |u: f64| 4.0 * std::f64::consts::PI * (4.0 * u).exp() + 9.0;
        match &self.phi.family {
            KernelFamily::GaussianPoly(c) => 2.0 * u + 2.0 * c.len() as f64,
            KernelFamily::Theta => theta_rate(u),
            KernelFamily::ModifiedTheta { lambda, m } => {
                theta_rate(u) + 2.0 * lambda.abs() * u + 2.0 * f64::from(*m) / u.max(1e-3)
            }
            KernelFamily::ThetaSqrtArg => theta_rate(u.sqrt()) / (2.0 * u.sqrt().max(1e-3)),
        }
    }

    /// Radius in `s` and its tail bound for the inner integral at `t ≥ 0`.
    fn inner_truncation(&self, t: &Real, derivative: bool) -> Result<(Truncation, bool)> {
        let tf = t.to_f64();
        let env = |s: f64| {
            let mut e = self.phi.log_envelope(s + tf) + self.phi.log_envelope(s - tf) + self.weight.log_bound(s, tf);
            if derivative {
                e += (2.0 * self.log_rate(s + tf)).ln();
            }
            e + 2f64.ln()
        };
        let (ln_target, relative) = match self.weight {
            AssocWeight::Power { n } => {
                // K(t) ≥ 2 φ(t+1)² / (2n+1) when φ decreases on the positive axis.
                let lower = self.phi.eval(&(t + 1.0), 0)?.value;
                let ln_lower = 2.0 * lower.ln_abs_f64() + (2.0 / f64::from(2 * n + 1)).ln();
                ((self.cfg.rel_tol / 10.0).ln() + ln_lower, true)
            }
            AssocWeight::Shifted { .. } => {
                if !(self.cfg.abs_tol > 0.0) {
                    return Err(Error::InvalidInput("the shifted weight needs abs_tol > 0".into()));
                }
                ((self.cfg.abs_tol / 10.0).ln(), false)
            }
        };
        let (radius, ln_tail) = radius_from_log_envelope(env, tf, ln_target)?;
        Ok((
            Truncation::Radius {
                radius,
                tail_bound: self.cfg.precision.real(ln_tail).exp(),
            },
            relative,
        ))
    }

    /// `K(t)` and optionally `K'(t)`.
    pub fn eval_pair(&self, t: &Real, with_derivative: bool) -> Result<(EstimatedValue, Option<EstimatedValue>)> {
        let negative = t.is_negative();
        let t = t.abs();
        let (trunc, relative) = self.inner_truncation(&t, with_derivative)?;
        let mut cfg = self.cfg.clone().with_truncation(trunc);
        if relative {
            cfg.abs_tol = 0.0;
        }
        let d = usize::from(with_derivative);
        let out = integrate_half_line_vec(
            |s| {
                let a = s + &t;
                let b = s - &t;
                let ja = self.phi.jet(&a, d)?;
                let jb = self.phi.jet(&b, d)?;
                let scale = (&ja.log_scale + &jb.log_scale).exp();
                let w = self.weight.eval(s, &t);
                let prod = &ja.scaled[0].value * &jb.scaled[0].value;
                let mut v = vec![&prod * &w * &scale * 2.0];
                if with_derivative {
                    let cross = &ja.scaled[1].value * &jb.scaled[0].value - &ja.scaled[0].value * &jb.scaled[1].value;
                    v.push((cross * &w + prod * self.weight.dt(s, &t)) * &scale * 2.0);
                }
                Ok(v)
            },
            1 + d,
            &cfg,
        )?;
        let mut it = out.into_iter();
        let k = it.next().expect("value component");
        let dk = it.next().map(|v| if negative { v.neg() } else { v });
        Ok((k, dk))
    }
}

impl KernelFunction for AssocKernel {
    fn jet(&self, t: &Real, d_max: usize) -> Result<KernelJet> {
        if d_max > 1 {
            return Err(Error::UnsupportedDerivativeOrder { order: d_max, max: 1 });
        }
        let (k, dk) = self.eval_pair(t, d_max == 1)?;
        let mut scaled = vec![k];
        scaled.extend(dk);
        Ok(KernelJet {
            log_scale: t.zero_like(),
            scaled,
        })
    }

    /// `2 ln φ(t) + (deg+1) ln(1+t) + ln 4`: for log-concave `φ` the product
    /// `φ(s+t)φ(s−t)` is at most `φ(t)²` for `|s| ≤ t` and `φ(s)²` beyond.
    fn log_envelope(&self, t: f64) -> f64 {
        let t = t.abs();
        let extra = match self.weight {
            AssocWeight::Power { .. } => 0.0,
            AssocWeight::Shifted { m } => f64::from(m) * 2f64.ln(),
        };
        2.0 * self.phi.log_envelope(t) + f64::from(self.weight.degree() + 1) * (1.0 + t).ln() + 4f64.ln() + extra
    }

    fn max_order(&self) -> usize {
        1
    }

    fn name(&self) -> String {
        match self.weight {
            AssocWeight::Power { n } => format!("K_{n}[{}]", self.phi),
            AssocWeight::Shifted { m } => format!("K_1[{}; (s^2-t^2)^{m}]", self.phi),
        }
    }
}

/// `K(t)` at `t`.
pub fn assoc_kernel_eval(phi: &KernelDescriptor, n: u32, t: &Real, cfg: &QuadratureConfig) -> Result<EstimatedValue> {
    Ok(AssocKernel::new(phi.clone(), n, cfg.clone()).eval_pair(t, false)?.0)
}

/// `φ` on the lattice `kh` and `K` on `jh` (step `h`) and `2jh` (step `2h`),
/// both from full-line trapezoid sums of `φ(s+t) φ(s−t) w(s,t)` over the
/// same lattice.
#[derive(Clone)]
struct Lattice {
    h: Real,
    phi: Vec<Real>,
    fine: Vec<Real>,
    coarse: Vec<Real>,
}

impl Lattice {
    fn new(kernel: &AssocKernel, h: Real, l_max: f64, t_max: f64, reuse: Option<&Lattice>) -> Result<Lattice> {
        let kmax = (l_max / h.to_f64()).ceil() as usize;
        let phi = (0..=kmax)
            .into_par_iter()
            .map(|k| {
                if let Some(old) = reuse.filter(|_| k % 2 == 0) {
                    if let Some(v) = old.phi.get(k / 2) {
                        return Ok(v.clone());
                    }
                }
                let t = &h * k as f64;
                let j = kernel.phi.jet(&t, 0)?;
                Ok(j.log_scale.exp() * &j.scaled[0].value)
            })
            .collect::<Result<Vec<_>>>()?;
        let jmax = ((t_max / h.to_f64()).ceil() as usize).min(kmax);
        let fine = (0..=jmax)
            .into_par_iter()
            .map(|j| Self::convolve(kernel, &phi, &h, j, 1))
            .collect();
        let coarse = (0..=jmax / 2)
            .into_par_iter()
            .map(|j| Self::convolve(kernel, &phi, &h, 2 * j, 2))
            .collect();
        Ok(Lattice { h, phi, fine, coarse })
    }

    /// `step·h Σ_i φ((i+j)h) φ((i−j)h) w(ih, jh)` over `i ≡ 0 mod step`.
    fn convolve(kernel: &AssocKernel, phi: &[Real], h: &Real, j: usize, step: usize) -> Real {
        let t = h * j as f64;
        let mut acc = &phi[j] * &phi[j] * kernel.weight.eval(&t.zero_like(), &t);
        let mut i = step;
        while i + j < phi.len() {
            let s = h * i as f64;
            acc += (&phi[i + j] * &phi[i.abs_diff(j)]) * kernel.weight.eval(&s, &t) * 2.0;
            i += step;
        }
        acc * h * step as f64
    }

    /// Trapezoid sums of `∫₀^∞ K(t) t^p cos(ωt + pπ/2) dt` at steps `h` and `2h`.
    fn transform_pair(&self, omega: &Real, p_ord: usize) -> (Real, Real, Real) {
        let sum = |vals: &[Real], step: f64| {
            let hs = &self.h * step;
            let mut acc = hs.zero_like();
            let mut mag = hs.zero_like();
            for (j, k) in vals.iter().enumerate() {
                let t = &hs * j as f64;
                let w = if j == 0 {
                    if p_ord == 0 { k / 2.0 } else { continue }
                } else {
                    k * t.powi(p_ord as i32)
                };
                mag += w.abs();
                acc += w * phase(p_ord, &(omega * &t));
            }
            (acc * &hs, mag * &hs)
        };
        let (f, mag) = sum(&self.fine, 1.0);
        let (c, _) = sum(&self.coarse, 2.0);
        (f, c, mag)
    }

    /// Sinc interpolants of `K` at `t` from the two lattices.
    fn sinc_pair(&self, t: &Real) -> (Real, Real) {
        let interp = |vals: &[Real], step: f64| {
            let hs = &self.h * step;
            let z = t / &hs;
            let zf = z.to_f64();
            let j0 = zf.round();
            if (zf - j0).abs() < 1e-12 && (j0 as usize) < vals.len() {
                let near = (&z - j0).abs();
                if near.to_f64() < 1e-40 {
                    return vals[j0 as usize].clone();
                }
            }
            let pi = Precision::of(t).pi();
            let s = (&z * &pi).sin();
            let mut acc = t.zero_like();
            let n = vals.len() as i64;
            for j in -(n - 1)..n {
                let v = &vals[j.unsigned_abs() as usize];
                let term = v / (&z - j as f64);
                if j % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc * s / pi
        };
        (interp(&self.fine, 1.0), interp(&self.coarse, 2.0))
    }

    fn halve(&self, kernel: &AssocKernel, l_max: f64, t_max: f64) -> Result<Lattice> {
        Lattice::new(kernel, &self.h / 2.0, l_max, t_max, Some(self))
    }
}

/// Cosine transforms of `K` from a lattice of `φ` samples. `K(jh)` and the
/// transform are both full-line trapezoid sums, which converge geometrically
/// for kernels analytic in a strip; the difference between steps `h` and `2h`
/// is reported as the error estimate. The step is halved until every probe
/// frequency up to `omega_max` meets tolerance.
pub struct MemoGrid {
    pub label: String,
    pub omega_max: f64,
    pub t_max: f64,
    pub l_max: f64,
    kernel: AssocKernel,
    lattice: Lattice,
    tail: Real,
    inner_tail: Real,
    precision: Precision,
    rel_tol: f64,
    abs_tol: f64,
    tail_table: OnceCell<TailIntegral>,
}

const PROBES: usize = 8;
const MAX_LATTICE: usize = 1 << 16;

impl MemoGrid {
    pub fn build(kernel: &AssocKernel, omega_max: f64) -> Result<MemoGrid> {
        let cfg = &kernel.cfg;
        if !(cfg.abs_tol > 0.0) {
            return Err(Error::InvalidInput("memoized transforms need abs_tol > 0".into()));
        }
        if !(omega_max >= 0.0) || !omega_max.is_finite() {
            return Err(Error::InvalidInput(format!("omega_max = {omega_max}")));
        }
        let p = cfg.precision;
        let ln_target = (cfg.abs_tol / 100.0).ln();
        let (t_max, ln_tail) =
            radius_from_log_envelope(|t| kernel.log_envelope(t) + t.max(1.0).ln(), 0.0, ln_target)?;
        let le_max = (0..=400)
            .map(|k| kernel.phi.log_envelope(k as f64 * 0.025))
            .fold(f64::NEG_INFINITY, f64::max);
        let (l_max, ln_inner) = radius_from_log_envelope(
            |u| {
                kernel.phi.log_envelope(u)
                    + le_max
                    + kernel.weight.log_bound(u.max(1.0), t_max)
                    + 2.0 * (1.0 + u).ln()
                    + 8f64.ln()
            },
            t_max,
            ln_target,
        )?;
        let h0 = (std::f64::consts::PI / (4.0 * omega_max.max(1.0))).min(t_max / 32.0);
        let mut lattice = Lattice::new(kernel, p.real(h0), l_max, t_max, None)?;
        let probes: Vec<Real> = (0..=PROBES)
            .map(|k| p.real(omega_max * k as f64 / PROBES as f64))
            .collect();
        loop {
            let ok = probes.iter().all(|w| {
                let (f, c, _) = lattice.transform_pair(w, 0);
                (&f - &c).abs().to_f64() <= cfg.abs_tol.max(cfg.rel_tol * f.abs().to_f64())
            });
            if ok {
                break;
            }
            if lattice.phi.len() > MAX_LATTICE {
                return Err(Error::NonConvergence {
                    panels: lattice.phi.len(),
                    achieved: lattice.h.to_f64(),
                    target: cfg.abs_tol,
                });
            }
            lattice = lattice.halve(kernel, l_max, t_max)?;
        }
        Ok(MemoGrid {
            label: kernel.name(),
            omega_max,
            t_max,
            l_max,
            kernel: kernel.clone(),
            lattice,
            tail: p.real(ln_tail).exp(),
            inner_tail: p.real(ln_inner).exp(),
            precision: p,
            rel_tol: cfg.rel_tol,
            abs_tol: cfg.abs_tol,
            tail_table: OnceCell::new(),
        })
    }

    /// Lattice step.
    pub fn step(&self) -> f64 {
        self.lattice.h.to_f64()
    }

    pub fn lattice_points(&self) -> usize {
        self.lattice.phi.len()
    }

    /// `∫₀^∞ K(t) t^p cos(ωt + pπ/2) dt`.
    pub fn transform(&self, omega: f64, p_ord: usize) -> Result<EstimatedValue> {
        if omega.abs() > self.omega_max * (1.0 + 1e-12) {
            return Err(Error::InvalidInput(format!(
                "frequency {omega} exceeds the grid's limit {}",
                self.omega_max
            )));
        }
        let p = self.precision;
        let (f, c, mag) = self.lattice.transform_pair(&p.real(omega), p_ord);
        let tp = p.real(self.t_max.max(1.0)).powi(p_ord as i32);
        let n = self.lattice.fine.len() as f64;
        let bound = (&f - &c).abs()
            + &self.tail
            + &self.inner_tail * &tp * self.t_max
            + mag * p.epsilon() * (8.0 * n);
        EstimatedValue::new(f, bound)
    }

    /// Whether a transform value met the grid's tolerance.
    pub fn meets_tolerance(&self, v: &EstimatedValue) -> bool {
        v.bound_f64() <= self.abs_tol.max(self.rel_tol * v.value_f64().abs()) * 10.0
    }

    /// Tail table for `Ḡ(t) = ∫_t^∞ K(u) du`, built on first use.
    pub fn tail_integral(&self) -> Result<&TailIntegral> {
        self.tail_table.get_or_try_init(|| TailIntegral::build(self))
    }
}

struct NodePanel {
    a: f64,
    b: f64,
    nodes: Vec<Real>,
    values: Vec<EstimatedValue>,
}

impl NodePanel {
    fn half(&self, p: Precision) -> Real {
        (p.real(self.b) - p.real(self.a)) / 2.0
    }

    /// `(high, |high − low|)` for `∫ g(t) cos(ωt + pπ/2)` over the panel.
    fn sums(&self, g: &[Real], omega: &Real, p_ord: usize, p: Precision) -> (Real, Real) {
        let rule = cc_rule(p);
        let half = self.half(p);
        let mut hi = p.zero();
        let mut lo = p.zero();
        for (j, (t, v)) in self.nodes.iter().zip(g).enumerate() {
            let v = v * phase(p_ord, &(omega * t));
            hi += &v * &rule.w_high[j];
            if j % 2 == 0 {
                lo += &v * &rule.w_low[j / 2];
            }
        }
        let err = (&hi - &lo).abs() * &half;
        (hi * &half, err)
    }
}

/// Piecewise Chebyshev antiderivatives of `K` on Clenshaw–Curtis panels
/// whose node values are sinc interpolants of the lattice.
pub struct TailIntegral {
    panels: Vec<NodePanel>,
    coeffs: Vec<Vec<Real>>,
    /// `right[i]` = integral of panels `i..`.
    right: Vec<Real>,
    bound: Real,
    tail: Real,
    t_max: f64,
    precision: Precision,
}

impl TailIntegral {
    fn build(memo: &MemoGrid) -> Result<TailIntegral> {
        let p = memo.precision;
        let t_max = memo.t_max;
        let target = memo.abs_tol / 10.0;
        // Sinc interpolation converges more slowly than the trapezoid sums.
        let mut lattice = memo.lattice.clone();
        loop {
            let worst = (0..32)
                .map(|q| {
                    let t = p.real((q as f64 + 0.5) * t_max / 32.0);
                    let (f, c) = lattice.sinc_pair(&t);
                    (f - c).abs().to_f64()
                })
                .fold(0.0, f64::max);
            if worst <= target {
                break;
            }
            if lattice.phi.len() > MAX_LATTICE {
                return Err(Error::NonConvergence {
                    panels: lattice.phi.len(),
                    achieved: worst,
                    target,
                });
            }
            lattice = lattice.halve(&memo.kernel, memo.l_max, t_max)?;
        }
        let sample = |a: f64, b: f64| -> NodePanel {
            let rule = cc_rule(p);
            let ra = p.real(a);
            let half = (p.real(b) - &ra) / 2.0;
            let mid = &ra + &half;
            let nodes: Vec<Real> = rule.nodes.iter().map(|x| &mid + &half * x).collect();
            let values = nodes
                .par_iter()
                .map(|t| {
                    let (f, c) = lattice.sinc_pair(t);
                    let b = (&f - &c).abs() + &memo.inner_tail;
                    EstimatedValue { value: f, abs_error_bound: b }
                })
                .collect();
            NodePanel { a, b, nodes, values }
        };
        let cap = (std::f64::consts::PI / memo.omega_max.max(1.0)).min(t_max / 8.0);
        let pieces = (t_max / cap).ceil() as usize;
        let mut panels: Vec<NodePanel> = (0..pieces)
            .map(|k| {
                let a = t_max * k as f64 / pieces as f64;
                let b = if k + 1 == pieces { t_max } else { t_max * (k + 1) as f64 / pieces as f64 };
                sample(a, b)
            })
            .collect();
        let probes: Vec<Real> = (0..=PROBES)
            .map(|k| p.real(memo.omega_max * k as f64 / PROBES as f64))
            .collect();
        loop {
            let errs: Vec<Vec<(Real, Real)>> = panels
                .iter()
                .map(|pn| {
                    let g: Vec<Real> = pn.values.iter().map(|v| v.value.clone()).collect();
                    probes.iter().map(|w| pn.sums(&g, w, 0, p)).collect()
                })
                .collect();
            let targets: Vec<f64> = (0..probes.len())
                .map(|k| {
                    let total: Real = errs.iter().map(|e| e[k].0.clone()).sum();
                    memo.abs_tol.max(total.abs().to_f64() * memo.rel_tol)
                })
                .collect();
            let scores: Vec<f64> = errs
                .iter()
                .map(|e| {
                    (0..probes.len())
                        .map(|k| e[k].1.ln_abs_f64() - targets[k].ln())
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect();
            let converged = (0..probes.len()).all(|k| {
                let e: Real = errs.iter().map(|e| e[k].1.clone()).sum();
                e.to_f64() <= targets[k]
            });
            if converged {
                break;
            }
            let worst = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let cut = (-(panels.len() as f64).ln()).min(worst);
            let mut next = Vec::with_capacity(panels.len() + 8);
            for (pn, s) in panels.into_iter().zip(&scores) {
                if *s >= cut && pn.b - pn.a > 1e-10 {
                    let m = 0.5 * (pn.a + pn.b);
                    next.push(sample(pn.a, m));
                    next.push(sample(m, pn.b));
                } else {
                    next.push(pn);
                }
            }
            if next.len() > memo.kernel.cfg.max_panels {
                return Err(Error::NonConvergence {
                    panels: next.len(),
                    achieved: worst,
                    target: 0.0,
                });
            }
            panels = next;
        }

        let nn = panels[0].nodes.len() - 1;
        let pi = p.pi();
        let cosines: Vec<Vec<Real>> = (0..=nn)
            .map(|k| (0..=nn).map(|j| (&pi * ((j * k) as f64 / nn as f64)).cos()).collect())
            .collect();
        let mut coeffs = Vec::with_capacity(panels.len());
        for pn in &panels {
            // Chebyshev coefficients a_k of the interpolant on x_j = cos(πj/N).
            let mut a = vec![p.zero(); nn + 2];
            for (k, ak) in a.iter_mut().enumerate().take(nn + 1) {
                let mut s = p.zero();
                for (j, v) in pn.values.iter().enumerate() {
                    let term = &v.value * &cosines[k][j];
                    if j == 0 || j == nn {
                        s += term / 2.0;
                    } else {
                        s += term;
                    }
                }
                *ak = s * (2.0 / nn as f64);
            }
            a[0] /= 2.0;
            a[nn] /= 2.0;
            // Antiderivative coefficients b_k, k = 1..=N+1.
            let mut b = vec![p.zero(); nn + 2];
            b[1] = &a[0] - &a[2] / 2.0;
            for k in 2..=nn + 1 {
                let next = if k < nn { a[k + 1].clone() } else { p.zero() };
                b[k] = (&a[k - 1] - next) / (2.0 * k as f64);
            }
            coeffs.push(b);
        }
        let mut right = vec![p.zero(); panels.len() + 1];
        for i in (0..panels.len()).rev() {
            let b = &coeffs[i];
            let f1: Real = b.iter().sum();
            let fm1 = clenshaw(b, &p.real(-1.0));
            right[i] = &right[i + 1] + (f1 - fm1) * panels[i].half(p);
        }
        let rule = cc_rule(p);
        let mut bound = memo.tail.clone();
        for pn in &panels {
            let g: Vec<Real> = pn.values.iter().map(|v| v.value.clone()).collect();
            bound += pn.sums(&g, &p.zero(), 0, p).1;
            let half = pn.half(p);
            for (j, v) in pn.values.iter().enumerate() {
                bound += (&v.abs_error_bound + v.value.abs() * p.epsilon() * 16.0) * &rule.w_high[j] * &half;
            }
        }
        Ok(TailIntegral {
            panels,
            coeffs,
            right,
            bound,
            tail: memo.tail.clone(),
            t_max,
            precision: p,
        })
    }

    fn eval_in_panel(&self, i: usize, t: &Real) -> Real {
        let p = self.precision;
        let pn = &self.panels[i];
        let half = pn.half(p);
        let mid = p.real(pn.a) + &half;
        let x = (t - &mid) / &half;
        let bk = &self.coeffs[i];
        let f1: Real = bk.iter().sum();
        (f1 - clenshaw(bk, &x)) * &half + &self.right[i + 1]
    }

    /// `Ḡ(t)` for `t ≥ 0`.
    pub fn eval(&self, t: f64) -> EstimatedValue {
        let p = self.precision;
        let value = match self.panels.iter().position(|pn| t >= pn.a && t <= pn.b) {
            Some(i) => self.eval_in_panel(i, &p.real(t)),
            None => p.zero(),
        };
        EstimatedValue {
            value,
            abs_error_bound: self.bound.clone(),
        }
    }

    /// `∫₀^∞ Ḡ(t) sin(ωt) dt`.
    pub fn sine_transform(&self, omega: f64) -> Result<EstimatedValue> {
        let p = self.precision;
        let w = p.real(omega);
        let mut total = p.zero();
        let mut err = p.zero();
        for (i, pn) in self.panels.iter().enumerate() {
            let g: Vec<Real> = pn.nodes.iter().map(|t| self.eval_in_panel(i, t)).collect();
            // sin(a) = cos(a + 3π/2)
            let (h, e) = pn.sums(&g, &w, 3, p);
            total += h;
            err += e;
        }
        // |Ḡ − Ḡ_h| ≤ bound on [0, T]; beyond T, ∫ Ḡ ≤ ∫_T^∞ u K(u) du ≤ tail.
        let bound = err + &self.bound * self.t_max + &self.tail;
        EstimatedValue::new(total, bound)
    }
}

/// `Σ b_k T_k(x)` by Clenshaw's recurrence.
fn clenshaw(b: &[Real], x: &Real) -> Real {
    let mut b1 = x.zero_like();
    let mut b2 = x.zero_like();
    for c in b.iter().skip(1).rev() {
        let b0 = x * &b1 * 2.0 - &b2 + c;
        b2 = b1;
        b1 = b0;
    }
    &b[0] + x * &b1 - &b2
}

/// `cos(a + pπ/2)`.
fn phase(p: usize, a: &Real) -> Real {
    let (s, c) = a.sin_cos();
    match p % 4 {
        0 => c,
        1 => -s,
        2 => -c,
        _ => s,
    }
}

type MemoCell = Arc<OnceCell<Arc<MemoGrid>>>;

static MEMO: Lazy<Mutex<HashMap<String, MemoCell>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// Frequencies are bucketed upward to multiples of 10 so nearby requests
/// share one grid.
fn bucket(omega: f64) -> f64 {
    (omega.abs() / 10.0).ceil().max(1.0) * 10.0
}

/// Shared memo grid for `kernel` covering frequencies up to `omega`. Built
/// once per key; later callers get the same grid.
pub fn memo_grid(kernel: &AssocKernel, omega: f64) -> Result<Arc<MemoGrid>> {
    let omega_max = bucket(omega);
    let cfg = &kernel.cfg;
    let key = format!(
        "{}|{omega_max}|{}|{}|{}|{}",
        kernel.name(),
        cfg.precision.decimal_digits(),
        cfg.rel_tol,
        cfg.abs_tol,
        cfg.max_panels
    );
    let cell = {
        let mut map = MEMO.lock().expect("memo map poisoned");
        map.entry(key).or_default().clone()
    };
    cell.get_or_try_init(|| MemoGrid::build(kernel, omega_max).map(Arc::new))
        .cloned()
}

/// `∫₀^∞ K(t) t^p cos(ωt + pπ/2) dt` through the shared memo grid.
pub fn assoc_transform(kernel: &AssocKernel, omega: f64, p: usize) -> Result<EstimatedValue> {
    memo_grid(kernel, omega)?.transform(omega, p)
}

/// `L_n(x) = (2^{2n}/(2n)!) ∫₀^∞ K_n(t) cos(2xt) dt` for the half-line
/// transform of `φ`.
pub fn laguerre_kernel_route(phi: &KernelDescriptor, n: u32, x: f64, cfg: &QuadratureConfig) -> Result<EstimatedValue> {
    let k = AssocKernel::new(phi.clone(), n, cfg.clone());
    let p = cfg.precision;
    let c = p.real(2.0).powi(2 * n as i32) / p.factorial(2 * n);
    Ok(assoc_transform(&k, 2.0 * x, 0)?.scale(&c))
}

/// Profile of [`laguerre_kernel_route`] over a grid.
pub fn laguerre_profile_kernel(phi: &KernelDescriptor, n: u32, grid: &[f64], cfg: &QuadratureConfig) -> Result<LaguerreProfile> {
    let omega = grid.iter().fold(0.0f64, |m, x| m.max(2.0 * x.abs()));
    let k = AssocKernel::new(phi.clone(), n, cfg.clone());
    let memo = memo_grid(&k, omega)?;
    let p = cfg.precision;
    let c = p.real(2.0).powi(2 * n as i32) / p.factorial(2 * n);
    let values = grid
        .par_iter()
        .map(|&x| Ok(memo.transform(2.0 * x, 0)?.scale(&c)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LaguerreProfile::from_values(
        format!("transform[{phi}]"),
        n as usize,
        grid.to_vec(),
        values,
        Route::Kernel,
    ))
}

/// Anything whose cosine transform can be scanned for sign, and whose kernel
/// values feed a Gram matrix.
pub trait CosineTarget: Sync {
    fn label(&self) -> String;

    fn precision(&self) -> Precision;

    /// `F^{(p)}(x) = ∫₀^∞ k(t) t^p cos(xt + pπ/2) dt` at each `x`.
    fn transform_grid(&self, xs: &[f64], p: usize) -> Result<Vec<EstimatedValue>>;

    /// `k(t)`.
    fn kernel_value(&self, t: f64) -> Result<EstimatedValue>;
}

impl CosineTarget for TransformSource {
    fn label(&self) -> String {
        self.spec.to_string()
    }

    fn precision(&self) -> Precision {
        self.cfg.precision
    }

    fn transform_grid(&self, xs: &[f64], p: usize) -> Result<Vec<EstimatedValue>> {
        transform_grid(&self.spec, xs, p, &self.cfg)
    }

    fn kernel_value(&self, t: f64) -> Result<EstimatedValue> {
        let rt = self.cfg.precision.real(t.abs());
        let v = self.spec.integrand_weight(&rt)?;
        let b = v.abs() * self.cfg.precision.epsilon() * 64.0;
        EstimatedValue::new(v, b)
    }
}

impl CosineTarget for AssocKernel {
    fn label(&self) -> String {
        self.name()
    }

    fn precision(&self) -> Precision {
        self.cfg.precision
    }

    fn transform_grid(&self, xs: &[f64], p: usize) -> Result<Vec<EstimatedValue>> {
        let omega = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let memo = memo_grid(self, omega)?;
        xs.par_iter().map(|&x| memo.transform(x, p)).collect()
    }

    fn kernel_value(&self, t: f64) -> Result<EstimatedValue> {
        Ok(self.eval_pair(&self.cfg.precision.real(t), false)?.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PdMethod {
    TransformNonnegativity,
    GramMatrix,
    SineCriterion,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Verdict {
    NoNegativityFound,
    /// `value + bound < 0` at `x`.
    NegativityWitness { x: f64, value: f64, bound: f64 },
    /// Some value's sign is not certified and none is certified negative.
    Inconclusive { x: f64, value: f64, bound: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct Scan {
    pub x_max: f64,
    pub n_grid: usize,
    pub min_value: f64,
    pub argmin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PDReport {
    pub kernel: String,
    pub method: PdMethod,
    pub verdict: Verdict,
    pub scan: Scan,
    pub tail_note: String,
}

fn verdict_from(grid: &[f64], values: &[EstimatedValue]) -> (Verdict, Scan) {
    let mut witness: Option<(f64, &EstimatedValue)> = None;
    let mut uncertain: Option<(f64, &EstimatedValue)> = None;
    let (mut min_value, mut argmin) = (f64::INFINITY, f64::NAN);
    for (&x, v) in grid.iter().zip(values) {
        let f = v.value_f64();
        if f < min_value {
            min_value = f;
            argmin = x;
        }
        if v.certified_negative() {
            if witness.map_or(true, |(_, w)| v.value < w.value) {
                witness = Some((x, v));
            }
        } else if !v.certified_positive() && uncertain.is_none() {
            uncertain = Some((x, v));
        }
    }
    let verdict = match (witness, uncertain) {
        (Some((x, v)), _) => Verdict::NegativityWitness {
            x,
            value: v.value_f64(),
            bound: v.bound_f64(),
        },
        (None, Some((x, v))) => Verdict::Inconclusive {
            x,
            value: v.value_f64(),
            bound: v.bound_f64(),
        },
        (None, None) => Verdict::NoNegativityFound,
    };
    let scan = Scan {
        x_max: grid.last().copied().unwrap_or(0.0),
        n_grid: grid.len(),
        min_value,
        argmin,
    };
    (verdict, scan)
}

/// Scans `F(x) = ∫₀^∞ k(t) cos(xt) dt` on `n_grid` points of `[0, x_max]`.
pub fn pd_check_transform<T: CosineTarget + ?Sized>(k: &T, x_max: f64, n_grid: usize) -> Result<PDReport> {
    if !(x_max > 0.0) || n_grid < 2 {
        return Err(Error::InvalidInput(format!("need x_max > 0 and n_grid >= 2, got {x_max}, {n_grid}")));
    }
    let grid = closed_grid(0.0, x_max, n_grid);
    let values = k.transform_grid(&grid, 0)?;
    let (verdict, scan) = verdict_from(&grid, &values);
    let end = values.last().expect("nonempty grid");
    let tail_note = format!(
        "|F(x_max)| = {:.3e} (bound {:.3e}) against min scan value {:.3e}; values beyond x_max are not examined",
        end.value_f64().abs(),
        end.bound_f64(),
        scan.min_value
    );
    Ok(PDReport {
        kernel: k.label(),
        method: PdMethod::TransformNonnegativity,
        verdict,
        scan,
        tail_note,
    })
}

/// Real zeros of the cosine transform of an associated kernel; simplicity
/// via the memoized first derivative.
pub fn assoc_zero_scan(kernel: &AssocKernel, interval: (f64, f64), n_grid: usize) -> Result<ZeroReport> {
    let omega = interval.0.abs().max(interval.1.abs());
    let memo = memo_grid(kernel, omega)?;
    let opts = ZeroOptions {
        simplicity_factor: 10.0,
        precision: kernel.cfg.precision,
        ..ZeroOptions::default()
    };
    bracket_zeros_sampled(
        |grid| grid.iter().map(|&x| Ok(memo.transform(x, 0)?.value)).collect(),
        |x| Ok(memo.transform(x, 0)?.value),
        |x| memo.transform(x, 1),
        interval,
        n_grid,
        &opts,
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct GramReport {
    pub kernel: String,
    pub matrix_dim: usize,
    pub min_eigenvalue: f64,
    pub tolerance: f64,
    /// `min_eigenvalue ≥ −tolerance`.
    pub pd_evidence: bool,
}

/// Smallest eigenvalue of `[k(x_j − x_k)]`.
pub fn pd_check_gram<F>(label: &str, k: F, points: &[f64]) -> Result<GramReport>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let n = points.len();
    if n == 0 || n > 200 {
        return Err(Error::InvalidInput(format!("need 1..=200 points, got {n}")));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("points must be distinct".into()));
    }
    let rows = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| k(points[i] - points[j])).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (rows[i][j] + rows[j][i]));
    let (min_eigenvalue, _) = min_eigenpair(&m);
    let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tolerance = 1e-12 * n as f64 * scale;
    Ok(GramReport {
        kernel: label.to_string(),
        matrix_dim: n,
        min_eigenvalue,
        tolerance,
        pd_evidence: min_eigenvalue >= -tolerance,
    })
}

/// The quadratic form `Σ_{j,k} k((j−k)h) ρ_j ρ_k` with `ρ_j = cos(ω j h)`
/// under a Hann taper, normalized by `k(0) Σ ρ_j²`. For large counts it
/// tends to `(1/h) Σ_ν 2F(ω + 2πν/h) / k(0)`; the taper suppresses the edge
/// terms that otherwise swamp a small negative lobe of `F`.
#[derive(Clone, Debug, Serialize)]
pub struct CosineProbe {
    pub kernel: String,
    pub omega: f64,
    pub spacing: f64,
    pub count: usize,
    pub normalized_form: EstimatedValue,
    pub negative: bool,
}

pub fn cosine_probe<T: CosineTarget + ?Sized>(k: &T, omega: f64, spacing: f64, count: usize) -> Result<CosineProbe> {
    if count < 2 || !(spacing > 0.0) {
        return Err(Error::InvalidInput(format!("need count >= 2 and spacing > 0, got {count}, {spacing}")));
    }
    let p = k.precision();
    let lags = (0..count)
        .into_par_iter()
        .map(|m| k.kernel_value(m as f64 * spacing))
        .collect::<Result<Vec<_>>>()?;
    let pi = p.pi();
    let rho: Vec<Real> = (0..count)
        .map(|j| {
            let taper = (&pi * ((j + 1) as f64 / (count + 1) as f64)).sin().square();
            (p.real(omega) * p.real(spacing) * j as f64).cos() * taper
        })
        .collect();
    let mut form = EstimatedValue::exact(p.zero());
    for (m, km) in lags.iter().enumerate() {
        let mut c = p.zero();
        for j in 0..count - m {
            c += &rho[j] * &rho[j + m];
        }
        if m > 0 {
            c *= 2.0;
        }
        form = form.add(&km.scale(&c));
    }
    let norm: Real = rho.iter().map(Real::square).sum::<Real>() * &lags[0].value;
    let normalized_form = form.scale(&(p.one() / norm));
    Ok(CosineProbe {
        kernel: k.label(),
        omega,
        spacing,
        count,
        negative: normalized_form.certified_negative(),
        normalized_form,
    })
}

/// `Ḡ(t) = ∫_t^∞ K_1(u) du` with `A = Ḡ(0)`.
#[derive(Clone, Debug, Serialize)]
pub struct GBar {
    pub t: f64,
    pub value: EstimatedValue,
    pub a: EstimatedValue,
}

pub fn gbar(phi: &KernelDescriptor, t: f64, cfg: &QuadratureConfig) -> Result<GBar> {
    let k = AssocKernel::new(phi.clone(), 1, cfg.clone());
    let memo = memo_grid(&k, 0.0)?;
    let tail = memo.tail_integral()?;
    Ok(GBar {
        t,
        value: tail.eval(t),
        a: tail.eval(0.0),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SineCriterion {
    pub kernel: String,
    pub x: f64,
    /// `∫₀^∞ Ḡ(t) sin(xt) dt`.
    pub lhs: EstimatedValue,
    /// `A / x`.
    pub rhs: EstimatedValue,
    pub a: EstimatedValue,
    /// `∫₀^∞ K_1(t) cos(xt) dt` computed directly.
    pub cosine_direct: EstimatedValue,
    /// `|cosine_direct − (A − x·lhs)|` (integration by parts).
    pub identity_residual: f64,
    pub identity_bound: f64,
    pub identity_holds: bool,
    /// `|cosine_direct − (A − lhs)|`, the display without the factor `x`.
    pub printed_form_residual: f64,
    pub printed_form_holds: bool,
    /// `lhs ≤ A/x`, i.e. the cosine transform is nonnegative at `x`.
    pub inequality_holds: bool,
    /// `lhs > 0` with margin.
    pub lhs_certified_positive: bool,
}

pub fn sine_criterion(phi: &KernelDescriptor, x: f64, cfg: &QuadratureConfig) -> Result<SineCriterion> {
    let k = AssocKernel::new(phi.clone(), 1, cfg.clone());
    sine_criterion_for(&k, x)
}

pub fn sine_criterion_for(k: &AssocKernel, x: f64) -> Result<SineCriterion> {
    if x == 0.0 || !x.is_finite() {
        return Err(Error::InvalidInput(format!("sine criterion needs x != 0, got {x}")));
    }
    let memo = memo_grid(k, x)?;
    let p = memo.precision;
    let tail = memo.tail_integral()?;
    let a = tail.eval(0.0);
    let lhs = tail.sine_transform(x)?;
    let cosine_direct = memo.transform(x, 0)?;
    let rx = p.real(x);
    let rhs = a.scale(&(p.one() / &rx));
    let derived = a.sub(&lhs.scale(&rx));
    let printed = a.sub(&lhs);
    let diff = cosine_direct.sub(&derived);
    let printed_diff = cosine_direct.sub(&printed);
    Ok(SineCriterion {
        kernel: k.name(),
        x,
        identity_residual: diff.value.abs().to_f64(),
        identity_bound: diff.bound_f64(),
        identity_holds: diff.value.abs() <= diff.abs_error_bound,
        printed_form_residual: printed_diff.value.abs().to_f64(),
        printed_form_holds: printed_diff.value.abs() <= printed_diff.abs_error_bound,
        inequality_holds: !rhs.sub(&lhs).certified_negative(),
        lhs_certified_positive: lhs.certified_positive(),
        lhs,
        rhs,
        a,
        cosine_direct,
    })
}

/// Scans `A − x ∫Ḡ sin(xt) dt` on `(0, x_max]`.
pub fn pd_check_sine(k: &AssocKernel, x_max: f64, n_grid: usize) -> Result<PDReport> {
    if !(x_max > 0.0) || n_grid < 2 {
        return Err(Error::InvalidInput(format!("need x_max > 0 and n_grid >= 2, got {x_max}, {n_grid}")));
    }
    let memo = memo_grid(k, x_max)?;
    let p = memo.precision;
    let tail = memo.tail_integral()?;
    let a = tail.eval(0.0);
    let grid = crate::theta::open_closed_grid(0.0, x_max, n_grid);
    let values = grid
        .par_iter()
        .map(|&x| Ok(a.sub(&tail.sine_transform(x)?.scale(&p.real(x)))))
        .collect::<Result<Vec<_>>>()?;
    let (verdict, scan) = verdict_from(&grid, &values);
    Ok(PDReport {
        kernel: k.name(),
        method: PdMethod::SineCriterion,
        verdict,
        tail_note: format!("A = {:.6e}; Ḡ tabulated on [0, {:.3}]", a.value_f64(), memo.t_max),
        scan,
    })
}

/// One sample of `φ'(t+s)/φ(t+s) < −φ'(t−s)/φ(t−s)`.
#[derive(Clone, Debug, Serialize)]
pub struct RatioSample {
    pub t: f64,
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn log_derivative_ratio_check(phi: &KernelDescriptor, samples: &[(f64, f64)], p: Precision) -> Result<Vec<RatioSample>> {
    samples
        .iter()
        .map(|&(t, s)| {
            let ratio = |u: f64| -> Result<EstimatedValue> {
                let j = phi.jet(&p.real(u), 1)?;
                Ok(j.scaled[1].div(&j.scaled[0]))
            };
            let l = ratio(t + s)?;
            let r = ratio(t - s)?.neg();
            Ok(RatioSample {
                t,
                s,
                lhs: l.value_f64(),
                rhs: r.value_f64(),
                holds: r.sub(&l).certified_positive(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct AssocAdmissibility {
    pub log_concavity: LogConcavityReport,
    pub report: AdmissibilityReport,
    pub ratio_samples: Vec<RatioSample>,
}

/// Admissibility of `K_n` on `(0, t_max]`, after checking log-concavity of
/// `φ` on the same range.
pub fn assoc_admissibility(
    phi: &KernelDescriptor,
    n: u32,
    t_max: f64,
    n_grid: usize,
    cfg: &QuadratureConfig,
) -> Result<AssocAdmissibility> {
    let p = cfg.precision;
    let lc = log_concavity_check(phi, ArgMap::Identity, (0.0, t_max), n_grid, p)
        .map_err(|e| Error::HypothesisUnverified(format!("log-concavity of {phi} not certified: {e}")))?;
    if !lc.pass {
        let w = lc.witness.unwrap_or((f64::NAN, f64::NAN));
        return Err(Error::HypothesisUnverified(format!(
            "{phi} is not log-concave: (log φ)'' = {:.3e} at t = {}",
            w.1, w.0
        )));
    }
    let k = AssocKernel::new(phi.clone(), n, cfg.clone());
    let report = admissibility_report(&k, t_max, n_grid, p)?;
    let pairs: Vec<(f64, f64)> = [0.25, 0.5, 0.75]
        .iter()
        .flat_map(|&f| [(t_max / 3.0, f * t_max / 3.0), (1.0, 0.5 * f)])
        .collect();
    let ratio_samples = log_derivative_ratio_check(phi, &pairs, p)?;
    Ok(AssocAdmissibility {
        log_concavity: lc,
        report,
        ratio_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::with_digits(30)
    }

    #[test]
    fn gaussian_autocorrelation() {
        let c = cfg();
        let p = c.precision;
        for t in [0.0, 1.0] {
            let k = assoc_kernel_eval(&KernelDescriptor::gaussian(), 0, &p.real(t), &c).unwrap();
            let exact = (p.pi() / 2.0).sqrt() * p.real(-2.0 * t * t).exp();
            assert!(((&k.value - &exact) / &exact).abs() < 1e-22, "t = {t}");
            assert!((&k.value - &exact).abs() <= k.abs_error_bound);
        }
    }

    #[test]
    fn evenness_and_odd_derivative() {
        let c = cfg();
        let p = c.precision;
        let k = AssocKernel::new(KernelDescriptor::example_312(), 1, c);
        let (a, da) = k.eval_pair(&p.real(0.8), true).unwrap();
        let (b, db) = k.eval_pair(&p.real(-0.8), true).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(da.unwrap().value, -db.unwrap().value);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let c = cfg();
        let p = c.precision;
        let k = AssocKernel::new(KernelDescriptor::example_312(), 1, c);
        let x = p.real(0.6);
        let (_, d) = k.eval_pair(&x, true).unwrap();
        let fd = crate::numerics::finite_difference_est(|t| Ok(k.eval_pair(t, false)?.0), &x, 1, 0.1).unwrap();
        assert!(d.unwrap().agrees_with(&fd, 0.0));
    }

    #[test]
    fn memo_transform_of_gaussian_k0() {
        // K_0 = √(π/2) e^{−2t²}: ∫₀^∞ K_0 cos(ωt) dt = (π/4) e^{−ω²/8}.
        let c = cfg();
        let p = c.precision;
        let k = AssocKernel::new(KernelDescriptor::gaussian(), 0, c);
        let memo = memo_grid(&k, 6.0).unwrap();
        for w in [0.0, 2.5, 6.0] {
            let v = memo.transform(w, 0).unwrap();
            let exact = p.pi() / 4.0 * p.real(-w * w / 8.0).exp();
            assert!((&v.value - &exact).abs() <= v.abs_error_bound, "omega = {w}");
            assert!(v.bound_f64() < 1e-20);
        }
        assert!(memo.transform(11.0, 0).is_err());
    }

    #[test]
    fn tail_integral_of_gaussian_k0() {
        // Ḡ(t) = √(π/2) ∫_t^∞ e^{−2u²} du = (π/4) erfc(√2 t); Ḡ(0) = π/4.
        let c = cfg();
        let p = c.precision;
        let k = AssocKernel::new(KernelDescriptor::gaussian(), 0, c);
        let memo = memo_grid(&k, 0.0).unwrap();
        let tail = memo.tail_integral().unwrap();
        let a = tail.eval(0.0);
        assert!((&a.value - p.pi() / 4.0).abs() <= a.abs_error_bound);
        let mut prev = a.value_f64();
        for t in [0.1, 0.5, 1.0, 2.0] {
            let g = tail.eval(t).value_f64();
            assert!(g < prev);
            prev = g;
        }
    }

    #[test]
    fn example_k1_transform_shape() {
        // 4∫K_1 cos(2xt) ∝ e^{−x²/2}(84240 − 13536x² + 712x⁴ − 24x⁶ + x⁸).
        let k = AssocKernel::new(KernelDescriptor::example_312(), 1, cfg());
        let shape = |x: f64| {
            (-x * x / 2.0).exp() * (84240.0 - 13536.0 * x * x + 712.0 * x.powi(4) - 24.0 * x.powi(6) + x.powi(8))
        };
        let r0 = assoc_transform(&k, 1.0, 0).unwrap().value_f64() / shape(0.5);
        for x in [1.0, 2.0, 5.0, 8.0] {
            let r = assoc_transform(&k, 2.0 * x, 0).unwrap().value_f64() / shape(x);
            assert!((r / r0 - 1.0).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn lattice_and_pointwise_kernel_agree() {
        let c = cfg();
        let k = AssocKernel::new(KernelDescriptor::theta(), 1, c.clone());
        let memo = memo_grid(&k, 4.0).unwrap();
        let tail = memo.tail_integral().unwrap();
        // Ḡ(0) − Ḡ(t) against a direct outer quadrature of pointwise K.
        let direct = crate::numerics::integrate(
            |t| Ok(k.eval_pair(t, false)?.0.value),
            0.0,
            0.2,
            &c,
        )
        .unwrap();
        let diff = tail.eval(0.0).sub(&tail.eval(0.2));
        assert!(diff.agrees_with(&direct, 0.0));
    }

    #[test]
    fn mathias_base_case() {
        // L_0(x) = ∫₀^∞ K_0(t) cos(2xt) dt against the derivative route.
        let c = cfg();
        let p = c.precision;
        for phi in [KernelDescriptor::theta(), KernelDescriptor::gaussian()] {
            let src = TransformSource::new(crate::transform::TransformSpec::new(phi.clone()), c.clone());
            for x in [0.0, 1.0, 3.0] {
                let a = crate::laguerre::laguerre_ln(&src, 0, &p.real(x)).unwrap();
                let b = laguerre_kernel_route(&phi, 0, x, &c).unwrap();
                assert!(a.agrees_with(&b, 1e-20), "{phi} x = {x}");
            }
        }
    }

    #[test]
    fn probe_separates_k1_and_k2() {
        let c = cfg();
        let k1 = AssocKernel::new(KernelDescriptor::example_312(), 1, c.clone());
        let k2 = AssocKernel::new(KernelDescriptor::example_312(), 2, c);
        assert!(cosine_probe(&k2, 6.2, 0.3, 134).unwrap().negative);
        assert!(cosine_probe(&k1, 6.2, 0.3, 134).unwrap().normalized_form.certified_positive());
    }

    #[test]
    fn gram_of_cosine_and_gaussian() {
        let r = pd_check_gram("cos", |x| Ok(x.cos()), &[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!(r.min_eigenvalue >= -1e-12);
        let pts: Vec<f64> = (0..50).map(|i| -5.0 + 10.0 * ((i * 37) % 50) as f64 / 49.0 + 1e-3 * i as f64).collect();
        let r = pd_check_gram("gauss", |x| Ok((-x * x).exp()), &pts).unwrap();
        assert!(r.min_eigenvalue >= -1e-10);
        assert!(pd_check_gram("dup", Ok, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn theta_ratio_inequality() {
        let s = log_derivative_ratio_check(&KernelDescriptor::theta(), &[(1.0, 0.5)], Precision::digits(30)).unwrap();
        assert!(s[0].holds);
    }

    #[test]
    fn clenshaw_matches_cosines() {
        let p = Precision::digits(30);
        let b: Vec<Real> = (0..6).map(|k| p.real(1.0 / (k + 1) as f64)).collect();
        let th = p.real(0.4);
        let direct: Real = b.iter().enumerate().map(|(k, c)| c * (&th * k as f64).cos()).sum();
        assert!((clenshaw(&b, &th.cos()) - direct).abs() < 1e-28);
    }
}
