//! Central finite differences with Richardson extrapolation.

use super::estimate::EstimatedValue;
use super::real::{Precision, Real};
use crate::error::{Error, Result};

/// Number of step halvings in the Richardson table.
const LEVELS: usize = 10;

/// One central difference `Σ (-1)^i C(k,i) f(x + (k/2 - i) h) / h^k`, with the
/// propagated bound from the sample errors.
fn central<F>(f: &F, x: &Real, order: u32, h: &Real, p: Precision) -> Result<(Real, Real)>
where
    F: Fn(&Real) -> Result<EstimatedValue>,
{
    let mut acc = p.zero();
    let mut noise = p.zero();
    let half = f64::from(order) / 2.0;
    for i in 0..=order {
        let c = p.binomial(order, i);
        let t = x + h * (half - f64::from(i));
        let v = f(&t)?;
        if i % 2 == 0 {
            acc += &v.value * &c;
        } else {
            acc -= &v.value * &c;
        }
        // Sample rounding at the working precision.
        let round = v.value.abs() * 2f64.powi(8 - v.value.prec() as i32);
        noise += (&v.abs_error_bound + round) * &c;
    }
    let hk = h.powi(order as i32);
    Ok((acc / &hk, noise / hk))
}

/// Derivative of `f` of the given order at `x`, for integrands that carry
/// their own error bounds.
///
/// Steps `h0, h0/2, ...` feed a Richardson table in powers of `h²`. The
/// result is the diagonal entry with the smallest change from its
/// predecessor; the bound is that change plus the sample noise amplified by
/// `h^-order`.
pub fn finite_difference_est<F>(f: F, x: &Real, order: u32, h0: f64) -> Result<EstimatedValue>
where
    F: Fn(&Real) -> Result<EstimatedValue>,
{
    if order == 0 {
        return f(x);
    }
    if !(h0 > 0.0) {
        return Err(Error::InvalidInput(format!("step h0 = {h0}")));
    }
    let p = Precision::digits(((x.prec().saturating_sub(24)) as f64 / std::f64::consts::LOG2_10) as u32);
    let mut table: Vec<Vec<Real>> = Vec::with_capacity(LEVELS);
    let mut noises = Vec::with_capacity(LEVELS);
    let mut best: Option<(Real, Real)> = None;
    let mut worse_in_row = 0;
    let mut h = p.real(h0);
    for m in 0..LEVELS {
        let (d, noise) = central(&f, x, order, &h, p)?;
        let mut row = vec![d];
        let mut pow4 = 1.0;
        for j in 1..=m {
            pow4 *= 4.0;
            let prev = &table[m - 1][j - 1];
            let next = &row[j - 1] + (&row[j - 1] - prev) / (pow4 - 1.0);
            row.push(next);
        }
        noises.push(noise);
        if m >= 1 {
            let cur = &row[m];
            let prev = &table[m - 1][m - 1];
            let err = (cur - prev).abs() + &noises[m] + &noises[m - 1];
            let improved = match &best {
                Some((_, e)) => err < *e,
                None => true,
            };
            if improved {
                best = Some((cur.clone(), err));
                worse_in_row = 0;
            } else {
                worse_in_row += 1;
                if worse_in_row >= 2 {
                    break;
                }
            }
        }
        table.push(row);
        h /= 2.0;
    }
    let (value, err) = best.expect("at least two levels");
    if !err.is_finite() || !(value.is_finite()) {
        return Err(Error::NonConvergence {
            panels: LEVELS,
            achieved: err.to_f64(),
            target: 0.0,
        });
    }
    if err > value.abs() && err > 1.0 {
        return Err(Error::NonConvergence {
            panels: LEVELS,
            achieved: err.to_f64(),
            target: value.abs().to_f64(),
        });
    }
    EstimatedValue::new(value, err)
}

/// [`finite_difference_est`] for exactly evaluated functions.
pub fn finite_difference<F>(f: F, x: &Real, order: u32, h0: f64) -> Result<EstimatedValue>
where
    F: Fn(&Real) -> Result<Real>,
{
    finite_difference_est(|t| Ok(EstimatedValue::exact(f(t)?)), x, order, h0)
}
