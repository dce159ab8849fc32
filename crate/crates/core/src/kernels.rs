//! Kernel families and admissibility diagnostics.
//!
//! Every family is even and positive. Evaluation returns scaled jets
//! `K^{(d)}(t) = exp(log_scale) · scaled[d]`, so that homogeneous tests
//! (log-concavity, monotonicity) work for values far below the floating-point
//! exponent range.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{finite_difference_est, EstimatedValue, ExpPoly, Precision, Real};
use crate::theta::{self, closed_grid, open_closed_grid, MAX_ORDER};

#[derive(Clone, Debug, PartialEq)]
pub enum KernelFamily {
    /// `e^{−t²} p(t)` with coefficients of `1, t, t², ...`; only even powers.
    GaussianPoly(Vec<f64>),
    Theta,
    /// `t^{2m} e^{λt²} Φ(t)`.
    ModifiedTheta { lambda: f64, m: u32 },
    /// `Φ(√|t|)`.
    ThetaSqrtArg,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelDescriptor {
    pub family: KernelFamily,
    pub label: String,
    /// Positive constant multiplying the kernel.
    pub scale: f64,
}

/// `K^{(d)}(t) = exp(log_scale) · scaled[d]`.
#[derive(Clone, Debug)]
pub struct KernelJet {
    pub log_scale: Real,
    pub scaled: Vec<EstimatedValue>,
}

impl KernelJet {
    pub fn value(&self, d: usize) -> EstimatedValue {
        self.scaled[d].scale_by_exp(&self.log_scale)
    }

    /// `(log K)'' · 1` in homogeneous form: `(K K'' − K'²) / K²`.
    pub fn log_second_derivative(&self) -> EstimatedValue {
        let s = &self.scaled;
        let num = s[0].mul(&s[2]).sub(&s[1].mul(&s[1]));
        num.div(&s[0].mul(&s[0]))
    }
}

/// Anything that behaves as an even kernel: jets on demand and a decay
/// envelope. Implemented by [`KernelDescriptor`] and by associated kernels.
pub trait KernelFunction: Sync {
    fn jet(&self, t: &Real, d_max: usize) -> Result<KernelJet>;

    /// Natural log of a majorant of `|K(t)|` for `t ≥ 0`, concave beyond
    /// the peak.
    fn log_envelope(&self, t: f64) -> f64;

    fn max_order(&self) -> usize;

    fn name(&self) -> String;

    fn eval(&self, t: &Real, d: usize) -> Result<EstimatedValue> {
        Ok(self.jet(t, d)?.value(d))
    }
}

impl KernelDescriptor {
    pub fn new(family: KernelFamily) -> Result<Self> {
        let label = family_label(&family);
        let k = KernelDescriptor {
            family,
            label,
            scale: 1.0,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn theta() -> Self {
        KernelDescriptor::new(KernelFamily::Theta).expect("theta is valid")
    }

    pub fn gaussian() -> Self {
        KernelDescriptor::new(KernelFamily::GaussianPoly(vec![1.0])).expect("gaussian is valid")
    }

    /// `e^{−t²}(15 + t² + t⁴)`.
    pub fn example_312() -> Self {
        KernelDescriptor::new(KernelFamily::GaussianPoly(vec![15.0, 0.0, 1.0, 0.0, 1.0]))
            .expect("fixture is valid")
    }

    pub fn scaled(mut self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidInput(format!("kernel scale {c}")));
        }
        self.scale *= c;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        match &self.family {
            KernelFamily::GaussianPoly(c) => validate_even_positive(c),
            KernelFamily::ModifiedTheta { lambda, .. } if !lambda.is_finite() => {
                Err(Error::InvalidInput(format!("lambda = {lambda}")))
            }
            _ => Ok(()),
        }
    }

    fn exp_poly(coeffs: &[f64], p: Precision) -> ExpPoly {
        ExpPoly::new(p.real(-1.0), coeffs.iter().map(|&c| p.real(c)).collect())
    }

    pub fn is_theta_family(&self) -> bool {
        !matches!(self.family, KernelFamily::GaussianPoly(_))
    }
}

fn family_label(f: &KernelFamily) -> String {
    match f {
        KernelFamily::GaussianPoly(c) if c.len() == 1 && c[0] == 1.0 => "gaussian".into(),
        KernelFamily::GaussianPoly(c) => format!(
            "gausspoly:{}",
            c.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
        ),
        KernelFamily::Theta => "theta".into(),
        KernelFamily::ModifiedTheta { lambda, m } => format!("modtheta:lambda={lambda},m={m}"),
        KernelFamily::ThetaSqrtArg => "thetasqrt".into(),
    }
}

/// Rejects odd terms and polynomials that are not positive on ℝ. Positivity
/// of `P(u) = p(√u)` is checked on a dense grid of `[0, B]` with `B` the
/// Cauchy root bound, plus `P(0) > 0` and a positive leading coefficient.
fn validate_even_positive(c: &[f64]) -> Result<()> {
    if c.is_empty() || c.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("gausspoly needs finite coefficients".into()));
    }
    if c.iter().skip(1).step_by(2).any(|&x| x != 0.0) {
        return Err(Error::InvalidInput(
            "gausspoly coefficients of odd powers must be zero".into(),
        ));
    }
    let even: Vec<f64> = c.iter().step_by(2).copied().collect();
    let lead = *even.iter().rev().find(|x| **x != 0.0).unwrap_or(&0.0);
    if !(even[0] > 0.0) || !(lead > 0.0) {
        return Err(Error::InvalidInput(
            "gausspoly polynomial must be strictly positive".into(),
        ));
    }
    let bound = 1.0 + even.iter().map(|x| (x / lead).abs()).fold(0.0, f64::max);
    let positive = (0..=4000).all(|i| {
        let u = bound * i as f64 / 4000.0;
        even.iter().rev().fold(0.0, |acc, a| acc * u + a) > 0.0
    });
    if !positive {
        return Err(Error::InvalidInput(
            "gausspoly polynomial must be strictly positive".into(),
        ));
    }
    Ok(())
}

impl fmt::Display for KernelDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 1.0 {
            write!(f, "{}", self.label)
        } else {
            write!(f, "{}*{}", self.scale, self.label)
        }
    }
}

impl FromStr for KernelDescriptor {
    type Err = Error;

    /// Accepts `theta`, `thetasqrt`, `gaussian`, `gausspoly:c0,c1,...`,
    /// `modtheta:lambda=L,m=M`, each optionally prefixed by `C*`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((c, rest)) = s.split_once('*') {
            let c: f64 = c
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad kernel scale in '{s}'")))?;
            return rest.parse::<KernelDescriptor>()?.scaled(c);
        }
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (s, None),
        };
        let family = match (name, args) {
            ("theta", None) => KernelFamily::Theta,
            ("thetasqrt", None) => KernelFamily::ThetaSqrtArg,
            ("gaussian", None) => KernelFamily::GaussianPoly(vec![1.0]),
            ("gausspoly", Some(a)) => {
                let coeffs = a
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::InvalidInput(format!("bad coefficients in '{s}'")))?;
                KernelFamily::GaussianPoly(coeffs)
            }
            ("modtheta", Some(a)) => {
                let mut lambda = None;
                let mut m = None;
                for kv in a.split(',') {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| Error::InvalidInput(format!("expected key=value in '{s}'")))?;
                    match k.trim() {
                        "lambda" => lambda = v.trim().parse::<f64>().ok(),
                        "m" => m = v.trim().parse::<u32>().ok(),
                        other => {
                            return Err(Error::InvalidInput(format!("unknown key '{other}' in '{s}'")))
                        }
                    }
                }
                match (lambda, m) {
                    (Some(lambda), Some(m)) => KernelFamily::ModifiedTheta { lambda, m },
                    _ => return Err(Error::InvalidInput(format!("modtheta needs lambda and m: '{s}'"))),
                }
            }
            _ => return Err(Error::InvalidInput(format!("unknown kernel '{s}'"))),
        };
        KernelDescriptor::new(family)
    }
}

impl KernelFunction for KernelDescriptor {
    fn jet(&self, t: &Real, d_max: usize) -> Result<KernelJet> {
        if d_max > self.max_order() {
            return Err(Error::UnsupportedDerivativeOrder {
                order: d_max,
                max: self.max_order(),
            });
        }
        let p = Precision::of(t);
        let mut jet = match &self.family {
            KernelFamily::GaussianPoly(c) => {
                let mut f = KernelDescriptor::exp_poly(c, p);
                let round = p.real(2.0).powi(8 - p.bits() as i32);
                let mut scaled = Vec::with_capacity(d_max + 1);
                for d in 0..=d_max {
                    let v = f.poly_at(t);
                    let mass = ExpPoly::new(p.zero(), f.coeffs.iter().map(Real::abs).collect())
                        .poly_at(&t.abs());
                    scaled.push(EstimatedValue::new(v, mass * &round)?);
                    if d < d_max {
                        f = f.derivative();
                    }
                }
                KernelJet {
                    log_scale: -t.square(),
                    scaled,
                }
            }
            KernelFamily::Theta => {
                let j = theta::theta_jet(t, d_max)?;
                KernelJet {
                    log_scale: j.log_scale,
                    scaled: j.scaled,
                }
            }
            KernelFamily::ModifiedTheta { lambda, m } => {
                let j = theta::theta_jet(t, d_max)?;
                let mut coeffs = vec![p.zero(); 2 * *m as usize + 1];
                coeffs[2 * *m as usize] = p.one();
                let mut h = ExpPoly::new(p.real(*lambda), coeffs);
                let mut hs = Vec::with_capacity(d_max + 1);
                for _ in 0..=d_max {
                    hs.push(h.eval(t));
                    h = h.derivative();
                }
                let scaled = (0..=d_max)
                    .map(|d| {
                        let mut acc = EstimatedValue::exact(p.zero());
                        for (i, hi) in hs.iter().enumerate().take(d + 1) {
                            let c = p.binomial(d as u32, i as u32) * hi;
                            acc = acc.add(&j.scaled[d - i].scale(&c));
                        }
                        acc
                    })
                    .collect();
                KernelJet {
                    log_scale: j.log_scale,
                    scaled,
                }
            }
            KernelFamily::ThetaSqrtArg => sqrt_arg_kernel_jet(t, d_max, p)?,
        };
        if self.scale != 1.0 {
            let c = p.real(self.scale);
            jet.scaled = jet.scaled.iter().map(|v| v.scale(&c)).collect();
        }
        Ok(jet)
    }

    fn log_envelope(&self, t: f64) -> f64 {
        let t = t.abs();
        let base = match &self.family {
            KernelFamily::GaussianPoly(c) => {
                let mass: f64 = c
                    .iter()
                    .enumerate()
                    .map(|(k, a)| a.abs() * t.powi(k as i32))
                    .sum();
                mass.ln() - t * t
            }
            KernelFamily::Theta => theta::theta_log_majorant(t, 0),
            KernelFamily::ModifiedTheta { lambda, m } => {
                let poly = if *m == 0 { 0.0 } else { 2.0 * f64::from(*m) * t.ln() };
                poly + lambda * t * t + theta::theta_log_majorant(t, 0)
            }
            KernelFamily::ThetaSqrtArg => theta::theta_log_majorant(t.sqrt(), 0),
        };
        base + self.scale.ln()
    }

    fn max_order(&self) -> usize {
        match self.family {
            KernelFamily::GaussianPoly(_) => 64,
            _ => MAX_ORDER,
        }
    }

    fn name(&self) -> String {
        self.to_string()
    }
}

/// Jet of `Φ(√|t|)`. At `t = 0` the even extension is used, with one-sided
/// derivatives `s^{(k)}(0⁺) = k! Φ^{(2k)}(0)/(2k)!` for `2k ≤ 8`.
fn sqrt_arg_kernel_jet(t: &Real, d_max: usize, p: Precision) -> Result<KernelJet> {
    if t.is_zero() {
        if 2 * d_max > MAX_ORDER {
            return Err(Error::UnsupportedDerivativeOrder {
                order: d_max,
                max: MAX_ORDER / 2,
            });
        }
        let j = theta::theta_jet(t, 2 * d_max)?;
        let scaled = (0..=d_max)
            .map(|k| {
                let c = p.factorial(k as u32) / p.factorial(2 * k as u32);
                j.scaled[2 * k].scale(&c)
            })
            .collect();
        return Ok(KernelJet {
            log_scale: j.log_scale,
            scaled,
        });
    }
    let (log_scale, mut scaled) = theta::sqrt_arg_scaled(&t.abs(), d_max)?;
    if t.is_negative() {
        for (d, v) in scaled.iter_mut().enumerate() {
            if d % 2 == 1 {
                *v = v.neg();
            }
        }
    }
    Ok(KernelJet { log_scale, scaled })
}

/// `K^{(d)}(t)` with an error bound.
pub fn kernel_eval(k: &KernelDescriptor, t: &Real, d: usize) -> Result<EstimatedValue> {
    k.eval(t, d)
}

/// Outcome of one admissibility clause.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub pass: bool,
    /// Offending point `(t, value)` when the check fails.
    pub witness: Option<(f64, f64)>,
}

impl Check {
    fn from_failures(failures: impl Iterator<Item = (f64, f64)>) -> Check {
        let mut failures = failures;
        match failures.next() {
            Some(w) => Check {
                pass: false,
                witness: Some(w),
            },
            None => Check {
                pass: true,
                witness: None,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DecayCondition {
    /// Fitted exponent `2 + eps` with `eps > 0.05`.
    Satisfied { eps: f64 },
    Borderline,
    Violated,
    /// Too few usable tail points to fit.
    Undetermined,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityReport {
    pub kernel: String,
    pub positivity: Check,
    pub evenness: Check,
    pub monotone_decreasing_on_positive_axis: Check,
    /// Largest relative gap between the analytic first derivative and a
    /// Richardson finite difference, over the sampled points.
    pub smoothness_probe: f64,
    pub decay_condition: DecayCondition,
    /// Fitted slope of `log(−log K)` against `log t` on the upper half of
    /// the grid.
    pub decay_exponent: f64,
    pub grid: String,
}

impl AdmissibilityReport {
    pub fn passes_i_to_iv(&self) -> bool {
        self.positivity.pass && self.evenness.pass && self.monotone_decreasing_on_positive_axis.pass
    }
}

/// Least-squares slope of `ys` against `xs`.
fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Classifies a fitted decay exponent against 2 with tolerance 0.05.
pub fn classify_decay(slope: f64) -> DecayCondition {
    if !slope.is_finite() {
        DecayCondition::Undetermined
    } else if (slope - 2.0).abs() <= 0.05 {
        DecayCondition::Borderline
    } else if slope > 2.0 {
        DecayCondition::Satisfied { eps: slope - 2.0 }
    } else {
        DecayCondition::Violated
    }
}

/// Checks clauses (i)–(v) of admissibility on `n_grid` points of `(0, T]`.
pub fn admissibility_report<K: KernelFunction + ?Sized>(
    k: &K,
    t_max: f64,
    n_grid: usize,
    p: Precision,
) -> Result<AdmissibilityReport> {
    if !(t_max > 0.0) || n_grid < 2 {
        return Err(Error::InvalidInput(format!("need T > 0 and n_grid >= 2, got {t_max}, {n_grid}")));
    }
    let grid = open_closed_grid(0.0, t_max, n_grid);
    struct Sample {
        t: f64,
        jet: KernelJet,
        mirror: EstimatedValue,
    }
    let samples = grid
        .par_iter()
        .map(|&t| {
            let rt = p.real(t);
            let jet = k.jet(&rt, 1)?;
            let mirror = k.jet(&-&rt, 0)?.scaled[0].clone();
            Ok(Sample { t, jet, mirror })
        })
        .collect::<Result<Vec<_>>>()?;

    let positivity = Check::from_failures(
        samples
            .iter()
            .filter(|s| !s.jet.scaled[0].certified_positive())
            .map(|s| (s.t, s.jet.value(0).value_f64())),
    );
    let evenness = Check::from_failures(
        samples
            .iter()
            .filter(|s| !s.jet.scaled[0].agrees_with(&s.mirror, 0.0))
            .map(|s| (s.t, (&s.jet.scaled[0].value - &s.mirror.value).to_f64())),
    );
    let monotone = Check::from_failures(
        samples
            .iter()
            .filter(|s| !s.jet.scaled[1].certified_negative())
            .map(|s| (s.t, s.jet.value(1).value_f64())),
    );

    // Smoothness: compare K' with a finite difference of K at a few points.
    let stride = (samples.len() / 8).max(1);
    let smooth = samples
        .par_iter()
        .step_by(stride)
        .map(|s| {
            let rt = p.real(s.t);
            // Step small against the logarithmic derivative, where theta
            // kernels vary by many orders of magnitude per unit t.
            let log_rate = (s.jet.scaled[1].value.clone() / &s.jet.scaled[0].value).to_f64().abs();
            let h0 = (s.t / 4.0).min(0.05).min(0.5 / log_rate.max(1e-300));
            let scale = s.jet.log_scale.clone();
            let fd = finite_difference_est(
                |u| {
                    let j = k.jet(u, 0)?;
                    let shift = (&j.log_scale - &scale).exp();
                    Ok(j.scaled[0].scale(&shift))
                },
                &rt,
                1,
                h0,
            )?;
            let denom = s.jet.scaled[1].value.abs().max(s.jet.scaled[0].value.abs());
            Ok(((&fd.value - &s.jet.scaled[1].value).abs() / denom).to_f64())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    // Decay: slope of log(−log K) against log t over the upper half.
    let (xs, ys): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .filter(|s| s.t >= t_max / 2.0)
        .filter_map(|s| {
            let ln_k = s.jet.log_scale.to_f64() + s.jet.scaled[0].value.ln_abs_f64();
            (ln_k < 0.0).then(|| (s.t.ln(), (-ln_k).ln()))
        })
        .unzip();
    let slope = if xs.len() >= 3 { fit_slope(&xs, &ys) } else { f64::NAN };

    Ok(AdmissibilityReport {
        kernel: k.name(),
        positivity,
        evenness,
        monotone_decreasing_on_positive_axis: monotone,
        smoothness_probe: smooth,
        decay_condition: classify_decay(slope),
        decay_exponent: slope,
        grid: format!("{n_grid} points on (0, {t_max}]"),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgMap {
    Identity,
    Sqrt,
}

#[derive(Clone, Debug, Serialize)]
pub struct LogConcavityReport {
    pub kernel: String,
    pub arg_map: ArgMap,
    /// Minimum of `−(log K∘map)''` over the grid.
    pub min_value: f64,
    pub pass: bool,
    pub witness: Option<(f64, f64)>,
    pub points: Vec<(f64, EstimatedValue)>,
}

/// `(log K(map(t)))''` at `t > 0`, from kernel jets via the chain rule.
pub fn log_second_derivative<K: KernelFunction + ?Sized>(k: &K, t: &Real, map: ArgMap) -> Result<EstimatedValue> {
    match map {
        ArgMap::Identity => Ok(k.jet(t, 2)?.log_second_derivative()),
        ArgMap::Sqrt => {
            let u = t.sqrt();
            let j = k.jet(&u, 2)?;
            let s = theta::compose_sqrt(&j.scaled, &u, 2);
            Ok(KernelJet {
                log_scale: j.log_scale,
                scaled: s,
            }
            .log_second_derivative())
        }
    }
}

/// Strict log-concavity of `K∘map` on `n_grid` points of `(a, b]`. Passes iff
/// `(log K∘map)'' < 0` with margin at every point; a point whose sign is not
/// certified is a `PrecisionLoss`.
pub fn log_concavity_check<K: KernelFunction + ?Sized>(
    k: &K,
    map: ArgMap,
    interval: (f64, f64),
    n_grid: usize,
    p: Precision,
) -> Result<LogConcavityReport> {
    let grid = if interval.0 > 0.0 {
        closed_grid(interval.0, interval.1, n_grid)
    } else {
        open_closed_grid(interval.0, interval.1, n_grid)
    };
    let points = grid
        .par_iter()
        .map(|&t| Ok((t, log_second_derivative(k, &p.real(t), map)?)))
        .collect::<Result<Vec<_>>>()?;
    if let Some((t, v)) = points.iter().find(|(_, v)| v.certified_sign().is_none()) {
        return Err(Error::PrecisionLoss {
            at: *t,
            margin: v.value_f64().abs(),
            bound: v.bound_f64(),
        });
    }
    let witness = points
        .iter()
        .find(|(_, v)| !v.certified_negative())
        .map(|(t, v)| (*t, v.value_f64()));
    let min_value = points
        .iter()
        .map(|(_, v)| -v.value_f64())
        .fold(f64::INFINITY, f64::min);
    Ok(LogConcavityReport {
        kernel: k.name(),
        arg_map: map,
        min_value,
        pass: witness.is_none(),
        witness,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        for s in [
            "theta",
            "thetasqrt",
            "gaussian",
            "gausspoly:15,0,1,0,1",
            "modtheta:lambda=0.1,m=1",
            "3*theta",
        ] {
            let k: KernelDescriptor = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
    }

    #[test]
    fn rejects_invalid_gausspoly() {
        assert!("gausspoly:1,1".parse::<KernelDescriptor>().is_err());
        assert!("gausspoly:-1,0,1".parse::<KernelDescriptor>().is_err());
        assert!("gausspoly:1,0,-3,0,1".parse::<KernelDescriptor>().is_err());
        assert!("gausspoly:1,0,0,0,-1".parse::<KernelDescriptor>().is_err());
        assert!("nonsense".parse::<KernelDescriptor>().is_err());
    }

    #[test]
    fn example_kernel_at_zero() {
        let p = Precision::DEFAULT;
        let v = kernel_eval(&KernelDescriptor::example_312(), &p.zero(), 0).unwrap();
        assert_eq!(v.value, 15.0);
    }

    #[test]
    fn theta_at_zero_matches_series() {
        let p = Precision::digits(40);
        let v = kernel_eval(&KernelDescriptor::theta(), &p.zero(), 0).unwrap();
        // Σ πn²(2πn² − 3)e^{−πn²}, summed independently for n ≤ 10.
        let pi = p.pi();
        let mut s = p.zero();
        for n in 1..=10 {
            let q = &pi * f64::from(n * n);
            s += &q * (&q * 2.0 - 3.0) * (-&q).exp();
        }
        assert!((&v.value - &s).abs() <= &v.abs_error_bound + 1e-38);
        assert!(v.abs_error_bound < 1e-25);
    }

    #[test]
    fn gaussian_log_second_derivative_is_minus_two() {
        let p = Precision::DEFAULT;
        let r = log_concavity_check(&KernelDescriptor::gaussian(), ArgMap::Identity, (0.0, 5.0), 50, p).unwrap();
        for (_, v) in &r.points {
            assert!((&v.value + 2.0).abs() < 1e-25);
        }
        assert!(r.pass);
    }

    #[test]
    fn modified_theta_derivative_by_leibniz() {
        let p = Precision::DEFAULT;
        let k: KernelDescriptor = "modtheta:lambda=0.1,m=1".parse().unwrap();
        let t = p.real(0.4);
        let d = k.eval(&t, 1).unwrap();
        let fd = crate::numerics::finite_difference_est(|u| k.eval(u, 0), &t, 1, 0.05).unwrap();
        assert!(d.agrees_with(&fd, 0.0));
    }

    #[test]
    fn sqrt_kernel_at_zero_uses_one_sided_series() {
        let p = Precision::DEFAULT;
        let k = KernelDescriptor::new(KernelFamily::ThetaSqrtArg).unwrap();
        let at0 = k.jet(&p.zero(), 1).unwrap();
        let near = k.jet(&p.real(1e-12), 1).unwrap();
        let (a, b) = (at0.value(1).value, near.value(1).value);
        let rel = ((&a - &b) / &a).abs();
        assert!(rel < 1e-9);
    }

    #[test]
    fn decay_classification() {
        assert_eq!(classify_decay(2.02), DecayCondition::Borderline);
        assert_eq!(classify_decay(2.5), DecayCondition::Satisfied { eps: 0.5 });
        assert_eq!(classify_decay(1.5), DecayCondition::Violated);
        assert_eq!(classify_decay(f64::NAN), DecayCondition::Undetermined);
    }
}
