//! Real-zero bracketing on a grid with bisection refinement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::diff::finite_difference_est;
use super::estimate::EstimatedValue;
use super::real::{Precision, Real};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocatedZero {
    pub bracket: (f64, f64),
    pub refined: f64,
    pub simple: bool,
    /// Derivative at the refined zero and its bound, when computed.
    pub derivative: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroReport {
    pub interval: (f64, f64),
    pub zeros: Vec<LocatedZero>,
    pub sign_change_count: usize,
}

#[derive(Clone, Debug)]
pub struct ZeroOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// `|f'(zero)|` must exceed this multiple of its error bound for the zero
    /// to count as simple.
    pub simplicity_factor: f64,
    pub precision: Precision,
}

impl Default for ZeroOptions {
    fn default() -> Self {
        ZeroOptions {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            simplicity_factor: 1.0,
            precision: Precision::DEFAULT,
        }
    }
}

/// Sign with zero counted as positive, so that each grid sign change has a
/// strictly negative endpoint.
fn side(v: &Real) -> bool {
    !v.is_negative()
}

/// Illinois false position on a sign-change bracket, falling back to a
/// bisection step whenever the bracket fails to halve over two steps.
fn bisect<F>(f: &F, mut a: f64, mut b: f64, fa: &Real, opts: &ZeroOptions) -> Result<f64>
where
    F: Fn(f64) -> Result<Real>,
{
    let sa = side(fa);
    let mut va = fa.to_f64();
    let mut vb = f(b)?.to_f64();
    let mut last_side = 0i8;
    let mut width_before = b - a;
    for it in 0..400 {
        let mid = 0.5 * (a + b);
        if (b - a) <= opts.rel_tol * mid.abs() + opts.abs_tol {
            break;
        }
        let secant = if va.is_finite() && vb.is_finite() && va != vb {
            b - vb * (b - a) / (vb - va)
        } else {
            f64::NAN
        };
        let m = if it % 2 == 1 && b - a > 0.5 * width_before {
            mid
        } else if secant > a && secant < b {
            secant
        } else {
            mid
        };
        if it % 2 == 1 {
            width_before = b - a;
        }
        if m <= a || m >= b {
            break;
        }
        let fm = f(m)?;
        if fm.is_zero() {
            return Ok(m);
        }
        let vm = fm.to_f64();
        if side(&fm) == sa {
            a = m;
            va = vm;
            if last_side == -1 {
                vb *= 0.5;
            }
            last_side = -1;
        } else {
            b = m;
            vb = vm;
            if last_side == 1 {
                va *= 0.5;
            }
            last_side = 1;
        }
    }
    Ok(0.5 * (a + b))
}

/// Brackets every sign change of `f` on an `n_grid`-point uniform grid and
/// refines each by bisection. Grid values are computed in parallel.
///
/// Simplicity is judged by `df` at the refined zero: the zero is simple when
/// `|df| > simplicity_factor * bound`. Zeros of even multiplicity, and pairs
/// of zeros closer than the grid spacing, produce no sign change and are
/// not reported.
pub fn bracket_zeros_with_derivative<F, D>(
    f: F,
    df: D,
    interval: (f64, f64),
    n_grid: usize,
    opts: &ZeroOptions,
) -> Result<ZeroReport>
where
    F: Fn(f64) -> Result<Real> + Sync,
    D: Fn(f64) -> Result<EstimatedValue> + Sync,
{
    bracket_zeros_sampled(
        |grid| grid.par_iter().map(|&x| f(x)).collect(),
        &f,
        df,
        interval,
        n_grid,
        opts,
    )
}

/// As [`bracket_zeros_with_derivative`], with the grid values supplied in
/// one batch by `sample` (for functions cheaper to evaluate jointly).
pub fn bracket_zeros_sampled<G, F, D>(
    sample: G,
    f: F,
    df: D,
    interval: (f64, f64),
    n_grid: usize,
    opts: &ZeroOptions,
) -> Result<ZeroReport>
where
    G: FnOnce(&[f64]) -> Result<Vec<Real>>,
    F: Fn(f64) -> Result<Real> + Sync,
    D: Fn(f64) -> Result<EstimatedValue> + Sync,
{
    let (lo, hi) = interval;
    if n_grid < 2 || !(lo < hi) {
        return Err(Error::InvalidInput(format!(
            "need n_grid >= 2 and a nonempty interval, got {n_grid} on ({lo}, {hi})"
        )));
    }
    let grid: Vec<f64> = (0..n_grid)
        .map(|i| lo + (hi - lo) * i as f64 / (n_grid - 1) as f64)
        .collect();
    let values = sample(&grid)?;
    if values.len() != n_grid {
        return Err(Error::InvalidInput(format!(
            "sampler returned {} values for {n_grid} points",
            values.len()
        )));
    }
    let brackets: Vec<usize> = (0..n_grid - 1)
        .filter(|&i| side(&values[i]) != side(&values[i + 1]))
        .collect();
    let zeros = brackets
        .par_iter()
        .map(|&i| {
            let (a, b) = (grid[i], grid[i + 1]);
            let refined = bisect(&f, a, b, &values[i], opts)?;
            let d = df(refined)?;
            let simple = d.value.abs() > &d.abs_error_bound * opts.simplicity_factor;
            Ok(LocatedZero {
                bracket: (a, b),
                refined,
                simple,
                derivative: Some((d.value_f64(), d.bound_f64())),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ZeroReport {
        interval,
        sign_change_count: zeros.len(),
        zeros,
    })
}

/// [`bracket_zeros_with_derivative`] using a Richardson finite difference of
/// `f` for the simplicity test.
pub fn bracket_zeros<F>(f: F, interval: (f64, f64), n_grid: usize, opts: &ZeroOptions) -> Result<ZeroReport>
where
    F: Fn(f64) -> Result<Real> + Sync,
{
    let h0 = (interval.1 - interval.0) / (n_grid.max(2) - 1) as f64;
    let p = opts.precision;
    let df = |x: f64| {
        finite_difference_est(
            |t: &Real| Ok(EstimatedValue::exact(f(t.to_f64())?)),
            &p.real(x),
            1,
            h0,
        )
    };
    bracket_zeros_with_derivative(&f, df, interval, n_grid, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_circle_roots() {
        let p = Precision::DEFAULT;
        let f = |x: f64| Ok(p.real(x * x - 1.0));
        let r = bracket_zeros(f, (-2.0, 2.0), 100, &ZeroOptions::default()).unwrap();
        assert_eq!(r.sign_change_count, 2);
        assert!((r.zeros[0].refined + 1.0).abs() < 1e-10);
        assert!((r.zeros[1].refined - 1.0).abs() < 1e-10);
        assert!(r.zeros.iter().all(|z| z.simple));
    }

    #[test]
    fn tangential_zero_is_missed() {
        let p = Precision::DEFAULT;
        let r = bracket_zeros(|x| Ok(p.real(x * x)), (-1.0, 1.0), 100, &ZeroOptions::default()).unwrap();
        assert_eq!(r.sign_change_count, 0);
    }

    #[test]
    fn brackets_are_ordered_and_disjoint() {
        let p = Precision::DEFAULT;
        let f = |x: f64| Ok(p.real(x).sin());
        let r = bracket_zeros(f, (0.5, 20.0), 400, &ZeroOptions::default()).unwrap();
        assert_eq!(r.sign_change_count, 6);
        for w in r.zeros.windows(2) {
            assert!(w[0].bracket.1 <= w[1].bracket.0);
        }
        for (k, z) in r.zeros.iter().enumerate() {
            assert!((z.refined - std::f64::consts::PI * (k + 1) as f64).abs() < 1e-10);
        }
    }
}
