//! Even moments `b_k = ∫₀^∞ t^{2k} K(t) dt`, the normalized coefficients
//! `γ_k = k! b_k / (2k)!`, Turán differences and the series `F_c`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{KernelDescriptor, KernelFunction};
use crate::numerics::{
    integrate_half_line, radius_from_log_envelope, EstimatedValue, Precision, QuadratureConfig, Real, Truncation,
};
use crate::transform::{transform_complex, transform_eval, TransformSpec};

pub const MAX_K: usize = 40;

/// Working digits for a table reaching `k_max`: 30 up to 10, 50 up to 25,
/// 80 beyond.
pub fn ladder_digits(k_max: usize) -> u32 {
    match k_max {
        0..=10 => 30,
        11..=25 => 50,
        _ => 80,
    }
}

/// Location of the peak of `t^{2k} K(t)`, where `2k/t = −K'/K`.
fn peak(kernel: &KernelDescriptor, k: usize, p: Precision) -> Result<f64> {
    if k == 0 {
        return Ok(0.0);
    }
    let g = |t: f64| -> Result<f64> {
        let j = kernel.jet(&p.real(t), 1)?;
        Ok(2.0 * k as f64 / t + j.scaled[1].value_f64() / j.scaled[0].value_f64())
    };
    let (mut lo, mut hi) = (1e-6, 1.0);
    while g(hi)? > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::DomainViolation {
                at: hi,
                detail: format!("no peak for t^{} K(t)", 2 * k),
            });
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `∫₀^∞ t^{2k} K(t) dt` to relative accuracy `cfg.rel_tol`, with panels
/// seeded around the integrand's peak.
pub fn moment(kernel: &KernelDescriptor, k: usize, cfg: &QuadratureConfig) -> Result<EstimatedValue> {
    let p = cfg.precision;
    let t_star = peak(kernel, k, p)?;
    let at_peak = kernel.jet(&p.real(t_star), 0)?;
    let ln_peak = at_peak.log_scale.to_f64()
        + at_peak.scaled[0].value.ln_abs_f64()
        + if k == 0 { 0.0 } else { 2.0 * k as f64 * t_star.ln() };
    let kk = k as f64;
    let (radius, ln_tail) = radius_from_log_envelope(
        |t| kernel.log_envelope(t) + 2.0 * kk * t.max(1e-300).ln(),
        t_star,
        ln_peak + (cfg.rel_tol / 1e3).ln(),
    )?;
    let breakpoints: Vec<f64> = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0]
        .iter()
        .map(|f| f * t_star)
        .filter(|&b| b > 0.0 && b < radius)
        .collect();
    let mut c = cfg
        .clone()
        .with_truncation(Truncation::Radius {
            radius,
            tail_bound: p.real(ln_tail).exp(),
        })
        .with_breakpoints(breakpoints);
    c.abs_tol = 0.0;
    integrate_half_line(|t| Ok(t.powi(2 * k as i32) * kernel.eval(t, 0)?.value), &c)
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentRow {
    pub k: usize,
    pub b: EstimatedValue,
    pub gamma: EstimatedValue,
    /// `γ_k² − γ_{k−1} γ_{k+1}`, for `k ≥ 1`.
    pub turan: Option<EstimatedValue>,
    /// `T_k² − T_{k−1} T_{k+1}`, for `k ≥ 2`.
    pub double_turan: Option<EstimatedValue>,
    /// `b_k² − ((2k−1)/(2k+1)) b_{k−1} b_{k+1}`, for `k ≥ 1`.
    pub classical: Option<EstimatedValue>,
    /// Both classical and normalized differences certified with the same
    /// sign, or both uncertified.
    pub classical_agrees: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentTable {
    pub kernel: String,
    pub precision_digits: u32,
    pub rows: Vec<MomentRow>,
}

impl MomentTable {
    /// `PrecisionExhausted` at the first `T_k` or `E_k` whose margin does not
    /// exceed its bound.
    pub fn require_certified(&self) -> Result<()> {
        for r in &self.rows {
            for (name, v) in [("T", &r.turan), ("E", &r.double_turan)] {
                if let Some(v) = v {
                    if !v.margin().is_positive() {
                        return Err(Error::PrecisionExhausted(format!(
                            "{name}_{} = {:.3e} with bound {:.3e} at {} digits",
                            r.k,
                            v.value_f64(),
                            v.bound_f64(),
                            self.precision_digits
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn sign_agrees(a: &EstimatedValue, b: &EstimatedValue) -> bool {
    a.certified_sign() == b.certified_sign()
}

/// Rows `0..=k_max` without the certification check.
pub fn compute_moment_table(kernel: &KernelDescriptor, k_max: usize, digits: Option<u32>) -> Result<MomentTable> {
    if k_max > MAX_K {
        return Err(Error::InvalidInput(format!("k_max = {k_max} exceeds {MAX_K}")));
    }
    let digits = digits.unwrap_or_else(|| ladder_digits(k_max));
    if k_max > 10 && digits < 30 {
        return Err(Error::InvalidInput(format!("k_max = {k_max} needs at least 30 digits, got {digits}")));
    }
    let cfg = QuadratureConfig::with_digits(digits);
    let p = cfg.precision;
    let b = (0..=k_max + 2)
        .into_par_iter()
        .map(|k| moment(kernel, k, &cfg))
        .collect::<Result<Vec<_>>>()?;
    let gamma: Vec<EstimatedValue> = b
        .iter()
        .enumerate()
        .map(|(k, bk)| bk.scale(&(p.factorial(k as u32) / p.factorial(2 * k as u32))))
        .collect();
    let turan: Vec<Option<EstimatedValue>> = (0..=k_max + 1)
        .map(|k| (k >= 1).then(|| gamma[k].mul(&gamma[k]).sub(&gamma[k - 1].mul(&gamma[k + 1]))))
        .collect();
    let rows = (0..=k_max)
        .map(|k| {
            let double_turan = (k >= 2).then(|| {
                let (t0, t1, t2) = (
                    turan[k - 1].as_ref().expect("k-1 >= 1"),
                    turan[k].as_ref().expect("k >= 1"),
                    turan[k + 1].as_ref().expect("k+1 >= 1"),
                );
                t1.mul(t1).sub(&t0.mul(t2))
            });
            let classical = (k >= 1).then(|| {
                let ratio = p.real((2 * k - 1) as f64) / p.real((2 * k + 1) as f64);
                b[k].mul(&b[k]).sub(&b[k - 1].mul(&b[k + 1]).scale(&ratio))
            });
            let classical_agrees = match (&classical, &turan[k]) {
                (Some(c), Some(t)) => Some(sign_agrees(c, t)),
                _ => None,
            };
            MomentRow {
                k,
                b: b[k].clone(),
                gamma: gamma[k].clone(),
                turan: turan[k].clone(),
                double_turan,
                classical,
                classical_agrees,
            }
        })
        .collect();
    Ok(MomentTable {
        kernel: kernel.to_string(),
        precision_digits: digits,
        rows,
    })
}

/// Rows `0..=k_max`; `PrecisionExhausted` if any Turán difference is
/// uncertified.
pub fn moment_table(kernel: &KernelDescriptor, k_max: usize, digits: Option<u32>) -> Result<MomentTable> {
    let t = compute_moment_table(kernel, k_max, digits)?;
    t.require_certified()?;
    Ok(t)
}

#[derive(Clone, Debug, Serialize)]
pub struct TuranMarginReport {
    pub kernel: String,
    pub precision_digits: u32,
    /// `min_k (T_k − bound_k) / γ_k²`.
    pub min_turan_margin: f64,
    pub argmin_turan: Option<usize>,
    /// `min_k (E_k − bound_k) / T_k²`.
    pub min_double_turan_margin: f64,
    pub argmin_double_turan: Option<usize>,
    /// Smallest `k` where `T_k` or `E_k` is not certified.
    pub first_precision_failure: Option<usize>,
    pub all_turan_nonnegative: bool,
    pub classical_agreement: bool,
}

pub fn turan_margin_report(table: &MomentTable) -> TuranMarginReport {
    let rel = |v: &EstimatedValue, scale: &EstimatedValue| -> f64 {
        let s = scale.value.square();
        if s.is_zero() {
            return f64::NAN;
        }
        ((&v.value - &v.abs_error_bound) / s).to_f64()
    };
    let mut min_t = (f64::INFINITY, None);
    let mut min_e = (f64::INFINITY, None);
    let mut first_fail = None;
    for r in &table.rows {
        if let Some(t) = &r.turan {
            let m = rel(t, &r.gamma);
            if m < min_t.0 {
                min_t = (m, Some(r.k));
            }
            if !t.margin().is_positive() && first_fail.is_none() {
                first_fail = Some(r.k);
            }
        }
        if let (Some(e), Some(t)) = (&r.double_turan, &r.turan) {
            let m = rel(e, t);
            if m < min_e.0 {
                min_e = (m, Some(r.k));
            }
            if !e.margin().is_positive() && first_fail.map_or(true, |f| r.k < f) {
                first_fail = Some(r.k);
            }
        }
    }
    TuranMarginReport {
        kernel: table.kernel.clone(),
        precision_digits: table.precision_digits,
        min_turan_margin: min_t.0,
        argmin_turan: min_t.1,
        min_double_turan_margin: min_e.0,
        argmin_double_turan: min_e.1,
        first_precision_failure: first_fail,
        all_turan_nonnegative: table
            .rows
            .iter()
            .filter_map(|r| r.turan.as_ref())
            .all(|t| t.lower().is_positive() || t.lower().is_zero()),
        classical_agreement: table.rows.iter().filter_map(|r| r.classical_agrees).all(|a| a),
    }
}

/// Both routes to `F_c(u) = ∫₀^∞ K(t) cosh(t√u) dt = Σ γ_k u^k / k!`.
#[derive(Clone, Debug, Serialize)]
pub struct FcReport {
    pub u: f64,
    pub k_max: usize,
    pub series: EstimatedValue,
    pub direct: EstimatedValue,
    pub residual: f64,
    pub agree: bool,
    /// Ratio-test estimate of the omitted tail.
    pub tail_estimate: f64,
    /// Term ratios grew over the last terms.
    pub series_divergence: bool,
}

pub fn fc_eval(kernel: &KernelDescriptor, u: f64, k_max: usize, cfg: &QuadratureConfig) -> Result<FcReport> {
    if !u.is_finite() {
        return Err(Error::InvalidInput(format!("u = {u}")));
    }
    if k_max > MAX_K {
        return Err(Error::InvalidInput(format!("k_max = {k_max} exceeds {MAX_K}")));
    }
    let p = cfg.precision;
    let b = (0..=k_max)
        .into_par_iter()
        .map(|k| moment(kernel, k, cfg))
        .collect::<Result<Vec<_>>>()?;
    let ru = p.real(u);
    let terms: Vec<EstimatedValue> = b
        .iter()
        .enumerate()
        .map(|(k, bk)| bk.scale(&(ru.powi(k as i32) / p.factorial(2 * k as u32))))
        .collect();
    let mut series = EstimatedValue::exact(p.zero());
    for t in &terms {
        series = series.add(t);
    }
    let ratios: Vec<f64> = terms
        .windows(2)
        .filter(|w| !w[0].value.is_zero())
        .map(|w| (w[1].value.abs() / w[0].value.abs()).to_f64())
        .collect();
    let last = ratios.last().copied().unwrap_or(0.0);
    let growing = ratios.len() >= 3 && ratios[ratios.len() - 3..].windows(2).all(|w| w[1] > w[0]);
    let series_divergence = u != 0.0 && (last >= 1.0 || (growing && last > 0.5));
    let tail_estimate = if u == 0.0 {
        0.0
    } else if series_divergence {
        f64::INFINITY
    } else {
        terms.last().map_or(0.0, |t| t.value_f64().abs()) * last / (1.0 - last)
    };
    if u > 0.0 && !series_divergence && tail_estimate >= cfg.abs_tol {
        return Err(Error::InvalidInput(format!(
            "k_max = {k_max} leaves a series tail near {tail_estimate:.3e} at u = {u}"
        )));
    }
    if tail_estimate.is_finite() {
        series = series.with_extra_bound(&p.real(tail_estimate));
    }
    let spec = TransformSpec::new(kernel.clone());
    let direct = if u >= 0.0 {
        transform_complex(&spec, &p.zero(), &ru.abs().sqrt(), cfg)?.re
    } else {
        transform_eval(&spec, &ru.abs().sqrt(), 0, cfg)?
    };
    let diff = series.sub(&direct);
    Ok(FcReport {
        u,
        k_max,
        residual: diff.value.abs().to_f64(),
        agree: !series_divergence && diff.value.abs() <= diff.abs_error_bound,
        series,
        direct,
        tail_estimate,
        series_divergence,
    })
}

/// `Σ_{k≤K} (−1)^k b_k x^{2k}/(2k)!` against the direct transform.
#[derive(Clone, Debug, Serialize)]
pub struct TaylorCheck {
    pub x: f64,
    pub terms: usize,
    pub partial: EstimatedValue,
    pub direct: EstimatedValue,
    pub residual: f64,
    /// `|b_{K+1} x^{2K+2}/(2K+2)!|`.
    pub next_term: f64,
    pub within_next_term: bool,
}

pub fn taylor_check(kernel: &KernelDescriptor, x: f64, terms: usize, cfg: &QuadratureConfig) -> Result<TaylorCheck> {
    let p = cfg.precision;
    let rx = p.real(x);
    let b = (0..=terms + 1)
        .into_par_iter()
        .map(|k| moment(kernel, k, cfg))
        .collect::<Result<Vec<_>>>()?;
    let term = |k: usize| -> EstimatedValue {
        let c: Real = rx.powi(2 * k as i32) / p.factorial(2 * k as u32);
        let t = b[k].scale(&c);
        if k % 2 == 1 {
            t.neg()
        } else {
            t
        }
    };
    let mut partial = EstimatedValue::exact(p.zero());
    for k in 0..=terms {
        partial = partial.add(&term(k));
    }
    let next = term(terms + 1);
    let direct = transform_eval(&TransformSpec::new(kernel.clone()), &rx, 0, cfg)?;
    let diff = partial.sub(&direct);
    let slack = &next.value.abs() + &diff.abs_error_bound + &next.abs_error_bound;
    Ok(TaylorCheck {
        x,
        terms,
        residual: diff.value.abs().to_f64(),
        next_term: next.value.abs().to_f64(),
        within_next_term: diff.value.abs() <= slack,
        partial,
        direct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Float;

    /// `∫₀^∞ t^{2k+j} e^{−t²} dt = Γ((2k+j+1)/2)/2` via MPFR's gamma.
    fn gauss_poly_moment(coeffs: &[f64], k: usize, p: Precision) -> Real {
        let mut acc = Float::with_val(p.bits(), 0);
        for (j, c) in coeffs.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            let g = Float::with_val(p.bits(), (2 * k + j + 1) as f64 / 2.0).gamma();
            acc += g * *c / 2;
        }
        Real::from_float(acc)
    }

    #[test]
    fn gaussian_moments_match_gamma() {
        let cfg = QuadratureConfig::with_digits(30);
        let p = cfg.precision;
        for k in [0, 1, 5, 12] {
            let m = moment(&KernelDescriptor::gaussian(), k, &cfg).unwrap();
            let exact = gauss_poly_moment(&[1.0], k, p);
            assert!((&m.value - &exact).abs() <= m.abs_error_bound, "k = {k}");
            assert!(((&m.value - &exact) / &exact).abs() < 1e-24);
        }
    }

    #[test]
    fn gamma_zero_is_b_zero() {
        let t = compute_moment_table(&KernelDescriptor::theta(), 3, None).unwrap();
        assert_eq!(t.rows[0].gamma.value, t.rows[0].b.value);
        assert!(t.rows.iter().all(|r| r.b.certified_positive()));
    }

    #[test]
    fn example_polynomial_turan_signs() {
        // Closed-form moments give T_1 < 0, T_2 < 0 and T_k > 0 for k = 3..10.
        let coeffs = [15.0, 0.0, 1.0, 0.0, 1.0];
        let p = Precision::digits(30);
        let b: Vec<Real> = (0..=12).map(|k| gauss_poly_moment(&coeffs, k, p)).collect();
        let g: Vec<Real> = (0..=12)
            .map(|k| &b[k] * p.factorial(k as u32) / p.factorial(2 * k as u32))
            .collect();
        let t = compute_moment_table(&KernelDescriptor::example_312(), 10, Some(30)).unwrap();
        for k in 1..=10 {
            let oracle = g[k].square() - &g[k - 1] * &g[k + 1];
            let v = t.rows[k].turan.as_ref().unwrap();
            assert!((&v.value - &oracle).abs() <= &v.abs_error_bound + oracle.abs() * 1e-20, "k = {k}");
            assert_eq!(v.certified_sign(), Some(oracle.signum_i()), "k = {k}");
        }
    }

    #[test]
    fn classical_form_is_a_positive_multiple() {
        let t = compute_moment_table(&KernelDescriptor::theta(), 6, None).unwrap();
        let p = Precision::digits(t.precision_digits);
        for r in &t.rows[1..] {
            let k = r.k as u32;
            let c = (p.factorial(k) / p.factorial(2 * k)).square();
            let tk = r.turan.as_ref().unwrap();
            let ck = r.classical.as_ref().unwrap().scale(&c);
            assert!(tk.agrees_with(&ck, 0.0));
            assert_eq!(r.classical_agrees, Some(true));
        }
    }

    #[test]
    fn fc_at_zero_and_negative_argument() {
        let cfg = QuadratureConfig::with_digits(30);
        let r = fc_eval(&KernelDescriptor::theta(), 0.0, 4, &cfg).unwrap();
        assert!(r.agree);
        let r = fc_eval(&KernelDescriptor::theta(), -4.0, 30, &cfg).unwrap();
        assert!(r.agree, "{r:?}");
    }
}
