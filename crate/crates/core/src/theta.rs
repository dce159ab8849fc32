//! The Jacobi theta kernel
//!
//! ```text
//! Φ(t) = Σ_{n≥1} πn² (2πn² e^{4t} − 3) exp(5t − πn² e^{4t})
//! ```
//!
//! and its derivatives up to order [`MAX_ORDER`].
//!
//! Derivatives are taken termwise. With `q = πn²` every derivative of a term
//! is a finite sum `Σ c_{d,j,k} q^k e^{(5+4j)t} e^{−q e^{4t}}` with integer
//! coefficients, tabulated once. Values are carried in scaled form: with
//! `w = e^{4t}`,
//!
//! ```text
//! Φ^{(d)}(t) = e^{5t − πw} · S_d(w),   S_d(w) = Σ_n e^{−π(n²−1)w} Σ c_{d,j,k} q_n^k w^j
//! ```
//!
//! so ratios and homogeneous sign tests stay meaningful where `e^{−πw}`
//! itself leaves the floating-point exponent range (around t = 4.8).

use once_cell::sync::Lazy;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{EstimatedValue, Precision, Real};

/// Highest supported derivative order.
pub const MAX_ORDER: usize = 8;

/// `COEFFS[d][j][k]` is the coefficient of `q^k e^{(5+4j)t} e^{−q e^{4t}}` in
/// the d-th derivative of one series term.
static COEFFS: Lazy<Vec<Vec<Vec<i128>>>> = Lazy::new(|| {
    let jn = MAX_ORDER + 2;
    let kn = MAX_ORDER + 3;
    let mut table = Vec::with_capacity(MAX_ORDER + 1);
    let mut c = vec![vec![0i128; kn]; jn];
    c[1][2] = 2;
    c[0][1] = -3;
    table.push(c.clone());
    for _ in 0..MAX_ORDER {
        let mut next = vec![vec![0i128; kn]; jn];
        for j in 0..jn {
            for k in 0..kn {
                let v = c[j][k];
                if v == 0 {
                    continue;
                }
                next[j][k] += (5 + 4 * j as i128) * v;
                next[j + 1][k + 1] -= 4 * v;
            }
        }
        table.push(next.clone());
        c = next;
    }
    table
});

fn max_k(d: usize) -> usize {
    d + 2
}

/// Bound on the series tail after `n_terms` terms.
#[derive(Clone, Debug, Serialize)]
pub struct ThetaTermBound {
    pub n_terms: usize,
    pub t: f64,
    pub tail_bound: Real,
}

/// `Φ^{(d)}(t) = exp(log_scale) · scaled[d]` for `d = 0..=d_max`.
#[derive(Clone, Debug)]
pub struct ThetaJet {
    pub log_scale: Real,
    pub scaled: Vec<EstimatedValue>,
    pub n_terms: usize,
}

impl ThetaJet {
    /// Unscaled derivative of order `d`. Underflows to zero beyond t ≈ 4.8.
    pub fn value(&self, d: usize) -> EstimatedValue {
        self.scaled[d].scale_by_exp(&self.log_scale)
    }
}

/// `Σ_{j,k} |c_{d,j,k}| q^k w^j`, the scaled magnitude of term n.
fn term_majorant(d: usize, q: &Real, w: &Real) -> Real {
    let mut acc = q.zero_like();
    for (j, row) in COEFFS[d].iter().enumerate() {
        for (k, &c) in row.iter().enumerate() {
            if c != 0 {
                acc += q.powi(k as i32) * w.powi(j as i32) * (c.unsigned_abs() as f64);
            }
        }
    }
    acc
}

/// Scaled tail `Σ_{n>N} M_d(n, w) e^{−π(n²−1)w}` bounded by a geometric series
/// whose ratio dominates every consecutive term ratio for `n ≥ N+1`.
fn scaled_tail(d: usize, n_terms: usize, w: &Real, p: Precision) -> Real {
    let pi = p.pi();
    let n1 = (n_terms + 1) as f64;
    let q = &pi * (n1 * n1);
    let first = term_majorant(d, &q, w) * (-(&pi * w) * (n1 * n1 - 1.0)).exp();
    let growth = ((n1 + 1.0) / n1).powi(2 * max_k(d) as i32);
    let rho = (-(&pi * w) * (2.0 * n1 + 1.0)).exp() * growth;
    if rho >= 1.0 {
        return p.real(f64::INFINITY);
    }
    first / (p.one() - rho)
}

/// Explicit bound on `|Σ_{n>N} a_n^{(order)}(t)|`. Monotone in `n_terms`.
pub fn theta_tail_bound(t: f64, n_terms: usize, order: usize, p: Precision) -> Result<ThetaTermBound> {
    if order > MAX_ORDER {
        return Err(Error::UnsupportedDerivativeOrder {
            order,
            max: MAX_ORDER,
        });
    }
    if n_terms < 1 {
        return Err(Error::InvalidInput("n_terms must be >= 1".into()));
    }
    let tt = p.real(t.abs());
    let w = (&tt * 4.0).exp();
    let scale = (&tt * 5.0 - p.pi() * &w).exp();
    Ok(ThetaTermBound {
        n_terms,
        t,
        tail_bound: scaled_tail(order, n_terms, &w, p) * scale,
    })
}

/// Scaled derivatives of Φ at `t` up to `d_max`, each with an error bound
/// covering series truncation and rounding.
pub fn theta_jet(t: &Real, d_max: usize) -> Result<ThetaJet> {
    if d_max > MAX_ORDER {
        return Err(Error::UnsupportedDerivativeOrder {
            order: d_max,
            max: MAX_ORDER,
        });
    }
    if !t.is_finite() {
        return Err(Error::NonFinite(format!("theta argument {t:?}")));
    }
    let p = Precision::of(t);
    let ta = t.abs();
    let pi = p.pi();
    let w = (&ta * 4.0).exp();
    let log_scale = &ta * 5.0 - &pi * &w;
    let target_exp = -(p.decimal_digits() as i32 + 5);
    let target = p.real(10.0).powi(target_exp);

    let mut n_terms = 1;
    loop {
        let ok = (0..=d_max).all(|d| {
            let tail = scaled_tail(d, n_terms, &w, p);
            let head = term_majorant(d, &pi, &w);
            tail < &head * &target
        });
        if ok {
            break;
        }
        n_terms += 1;
        if n_terms > 200 {
            return Err(Error::PrecisionExhausted(format!(
                "theta series tail at t = {} does not reach 1e{target_exp}",
                t.to_f64()
            )));
        }
    }

    let jn = d_max + 2;
    let kn = d_max + 3;
    let w_pows: Vec<Real> = (0..jn).map(|j| w.powi(j as i32)).collect();
    let mut sums = vec![p.zero(); d_max + 1];
    let mut mags = vec![p.zero(); d_max + 1];
    for n in 1..=n_terms {
        let nn = (n * n) as f64;
        let q = &pi * nn;
        let damp = if n == 1 {
            p.one()
        } else {
            (-(&pi * &w) * (nn - 1.0)).exp()
        };
        let q_pows: Vec<Real> = (0..kn).map(|k| q.powi(k as i32)).collect();
        for d in 0..=d_max {
            let mut poly = p.zero();
            let mut mag = p.zero();
            for (j, row) in COEFFS[d].iter().enumerate().take(jn) {
                for (k, &c) in row.iter().enumerate().take(kn) {
                    if c == 0 {
                        continue;
                    }
                    let term = &q_pows[k] * &w_pows[j] * p.int128(c);
                    mag += term.abs();
                    poly += term;
                }
            }
            sums[d] += &poly * &damp;
            mags[d] += mag * &damp;
        }
    }
    let round = p.real(2.0).powi(-(p.bits() as i32) + 8);
    let negative = t.is_negative();
    let scaled = (0..=d_max)
        .map(|d| {
            let tail = scaled_tail(d, n_terms, &w, p);
            let bound = tail + &mags[d] * &round;
            let v = if negative && d % 2 == 1 {
                -&sums[d]
            } else {
                sums[d].clone()
            };
            EstimatedValue::new(v, bound)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThetaJet {
        log_scale,
        scaled,
        n_terms,
    })
}

/// `Φ^{(order)}(t)` with an error bound. Negative `t` uses evenness.
pub fn theta_eval(t: &Real, order: usize) -> Result<EstimatedValue> {
    let jet = theta_jet(t, order)?;
    Ok(jet.value(order))
}

/// Natural log of a majorant of `|Φ^{(d)}(t)|` for `t ≥ 0`, in double
/// precision. Concave for t beyond the kernel's peak; used to pick
/// quadrature radii.
pub fn theta_log_majorant(t: f64, d: usize) -> f64 {
    let t = t.abs();
    let w = (4.0 * t).exp();
    let pi = std::f64::consts::PI;
    let m = |n: f64| -> f64 {
        let q = pi * n * n;
        let mut acc = 0.0;
        for (j, row) in COEFFS[d].iter().enumerate() {
            for (k, &c) in row.iter().enumerate() {
                if c != 0 {
                    acc += (c.unsigned_abs() as f64) * q.powi(k as i32) * w.powi(j as i32);
                }
            }
        }
        acc
    };
    let rho = 1.5f64.powi(2 * max_k(d) as i32) * (-5.0 * pi * w).exp();
    let tail = m(2.0) * (-3.0 * pi * w).exp() / (1.0 - rho);
    5.0 * t - pi * w + (m(1.0) + tail).ln()
}

/// A grid of `n` points on `(a, b]`: `a + (b − a) i / n` for `i = 1..=n`.
pub fn open_closed_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// A grid of `n` points on `[a, b]`.
pub fn closed_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// One grid point of a sign probe: a homogeneous quantity in scaled form.
/// Only its sign and margin are meaningful.
#[derive(Clone, Debug, Serialize)]
pub struct ProbePoint {
    pub t: f64,
    pub value: EstimatedValue,
}

impl ProbePoint {
    pub fn margin(&self) -> Real {
        self.value.margin()
    }
}

/// Summary of a sign test over a grid.
#[derive(Clone, Debug, Serialize)]
pub struct SignProbe {
    pub label: String,
    pub points: Vec<ProbePoint>,
    /// True when every point is positive with margin exceeding its bound.
    pub all_positive: bool,
    /// True when some point is negative with margin exceeding its bound.
    pub negative_found: bool,
    /// Smallest `value / |value|`-normalized margin point, for reporting.
    pub worst_t: f64,
    pub worst_value: f64,
}

impl SignProbe {
    fn from_points(label: &str, points: Vec<ProbePoint>) -> SignProbe {
        let all_positive = points.iter().all(|p| p.value.certified_positive());
        let negative_found = points.iter().any(|p| p.value.certified_negative());
        let worst = points
            .iter()
            .min_by(|a, b| {
                let ra = relative_margin(&a.value);
                let rb = relative_margin(&b.value);
                ra.partial_cmp(&rb).unwrap_or(std::cmp::Ordering::Equal)
            })
            .cloned();
        let (worst_t, worst_value) = worst
            .map(|p| (p.t, p.value.value_f64()))
            .unwrap_or((f64::NAN, f64::NAN));
        SignProbe {
            label: label.to_string(),
            points,
            all_positive,
            negative_found,
            worst_t,
            worst_value,
        }
    }

    /// `PrecisionLoss` at the first point whose sign is not certified.
    pub fn require_certified(&self) -> Result<()> {
        match self.points.iter().find(|p| p.value.certified_sign().is_none()) {
            Some(p) => Err(Error::PrecisionLoss {
                at: p.t,
                margin: p.value.value_f64().abs(),
                bound: p.value.bound_f64(),
            }),
            None => Ok(()),
        }
    }
}

/// Signed value divided by its bound, as a double (large when well
/// certified, negative when negative).
fn relative_margin(v: &EstimatedValue) -> f64 {
    if v.abs_error_bound.is_zero() {
        return f64::from(v.value.signum_i()) * f64::INFINITY;
    }
    let l = v.value.ln_abs_f64() - v.abs_error_bound.ln_abs_f64();
    f64::from(v.value.signum_i()) * l.exp()
}

fn probe_grid<F>(label: &str, grid: &[f64], p: Precision, f: F) -> Result<SignProbe>
where
    F: Fn(&Real) -> Result<EstimatedValue> + Sync,
{
    let points = grid
        .par_iter()
        .map(|&t| {
            Ok(ProbePoint {
                t,
                value: f(&p.real(t))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SignProbe::from_points(label, points))
}

/// `J_n(t) = (Φ^{(n)})² − Φ^{(n−1)}Φ^{(n+1)}` in scaled form (multiplied by
/// `e^{−2(5t − πw)}`), for `n = 1..=n_max` on `n_grid` points of `[a, b]`
/// with `a ≥ 0`. The outcome is recorded, not asserted.
pub fn derivative_log_concavity_probe(
    n_max: usize,
    interval: (f64, f64),
    n_grid: usize,
    p: Precision,
) -> Result<Vec<SignProbe>> {
    if n_max < 1 || n_max + 1 > MAX_ORDER {
        return Err(Error::UnsupportedDerivativeOrder {
            order: n_max + 1,
            max: MAX_ORDER,
        });
    }
    let grid = closed_grid(interval.0.max(0.0), interval.1, n_grid);
    (1..=n_max)
        .map(|n| {
            probe_grid(&format!("J_{n}"), &grid, p, |t| {
                let jet = theta_jet(t, n + 1)?;
                let s = &jet.scaled;
                Ok(s[n].mul(&s[n]).sub(&s[n - 1].mul(&s[n + 1])))
            })
        })
        .collect()
}

/// Scaled derivatives of `s(t) = Φ(√t)` up to order 4, for `t > 0`.
///
/// With `u = √t` and `D = (1/(2u)) d/du`, `s^{(k)}(t) = (D^k Φ)(u)`. Each
/// `D^k Φ` is a combination `Σ_j α_{k,j}(u) Φ^{(j)}(u)` whose coefficients
/// are Laurent monomials in u, tracked exactly.
pub fn sqrt_arg_jet(t: &Real, k_max: usize) -> Result<Vec<EstimatedValue>> {
    Ok(sqrt_arg_scaled(t, k_max)?.1)
}

/// As [`sqrt_arg_jet`], also returning the log scale shared by all orders
/// (that of Φ at `√t`).
pub fn sqrt_arg_scaled(t: &Real, k_max: usize) -> Result<(Real, Vec<EstimatedValue>)> {
    if !t.is_positive() {
        return Err(Error::DomainViolation {
            at: t.to_f64(),
            detail: "Φ(√t) derivatives need t > 0".into(),
        });
    }
    if k_max > MAX_ORDER {
        return Err(Error::UnsupportedDerivativeOrder {
            order: k_max,
            max: MAX_ORDER,
        });
    }
    let u = t.sqrt();
    let jet = theta_jet(&u, k_max)?;
    Ok((jet.log_scale, compose_sqrt(&jet.scaled, &u, k_max)))
}

/// Derivatives in t of `g(√t)` from derivatives `g^{(j)}(u)`, `u = √t > 0`.
pub fn compose_sqrt(jet: &[EstimatedValue], u: &Real, k_max: usize) -> Vec<EstimatedValue> {
    sqrt_chain(k_max)
        .iter()
        .map(|op| {
            let mut acc = EstimatedValue::exact(u.zero_like());
            for (j, terms) in op.iter().enumerate() {
                for &(pow, c) in terms {
                    let coef = u.powi(pow) * c;
                    acc = acc.add(&jet[j].scale(&coef));
                }
            }
            acc
        })
        .collect()
}

/// `ops[k][j]` lists `(power, coefficient)` pairs with
/// `D^k Φ = Σ_j Σ coefficient · u^power · Φ^{(j)}`.
fn sqrt_chain(k_max: usize) -> Vec<Vec<Vec<(i32, f64)>>> {
    let mut ops = Vec::with_capacity(k_max + 1);
    let mut cur: Vec<Vec<(i32, f64)>> = vec![vec![(0, 1.0)]];
    ops.push(cur.clone());
    for _ in 0..k_max {
        let mut next: Vec<Vec<(i32, f64)>> = vec![Vec::new(); cur.len() + 1];
        for (j, terms) in cur.iter().enumerate() {
            for &(pow, c) in terms {
                // d/du (c u^pow Φ^{(j)}) / (2u)
                if pow != 0 {
                    next[j].push((pow - 2, c * f64::from(pow) / 2.0));
                }
                next[j + 1].push((pow - 1, c / 2.0));
            }
        }
        for terms in &mut next {
            terms.sort_by_key(|&(pow, _)| pow);
            let mut merged: Vec<(i32, f64)> = Vec::new();
            for &(pow, c) in terms.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == pow => last.1 += c,
                    _ => merged.push((pow, c)),
                }
            }
            merged.retain(|&(_, c)| c != 0.0);
            *terms = merged;
        }
        ops.push(next.clone());
        cur = next;
    }
    ops
}

/// Grid report of `(log f)''` with `f = s'² − s s''`, `s(t) = Φ(√t)`.
#[derive(Clone, Debug, Serialize)]
pub struct Open414Report {
    pub interval: (f64, f64),
    /// Scaled `f` values; all must be positive.
    pub f_positive: bool,
    /// `(log f)''`, which is scale invariant.
    pub points: Vec<ProbePoint>,
    pub min: f64,
    pub max: f64,
    pub all_negative: bool,
}

/// Probes the conjectured concavity of `log f`. A nonpositive `f` is a
/// `DomainViolation`, since `f > 0` is known.
pub fn open_4_14_probe(interval: (f64, f64), n_grid: usize, p: Precision) -> Result<Open414Report> {
    let grid = open_closed_grid(interval.0, interval.1, n_grid);
    let points = grid
        .par_iter()
        .map(|&t| {
            let s = sqrt_arg_jet(&p.real(t), 4)?;
            let f = s[1].mul(&s[1]).sub(&s[0].mul(&s[2]));
            if !f.certified_positive() {
                return Err(Error::DomainViolation {
                    at: t,
                    detail: format!("f = s'^2 - s s'' not certified positive ({f:?})"),
                });
            }
            let f1 = s[1].mul(&s[2]).sub(&s[0].mul(&s[3]));
            let f2 = s[2].mul(&s[2]).sub(&s[0].mul(&s[4]));
            let r1 = f1.div(&f);
            let value = f2.div(&f).sub(&r1.mul(&r1));
            Ok(ProbePoint { t, value })
        })
        .collect::<Result<Vec<_>>>()?;
    let vals: Vec<f64> = points.iter().map(|p| p.value.value_f64()).collect();
    Ok(Open414Report {
        interval,
        f_positive: true,
        all_negative: points.iter().all(|p| p.value.certified_negative()),
        min: vals.iter().copied().fold(f64::INFINITY, f64::min),
        max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        points,
    })
}

/// `d²/dt² Φ(√t) = Φ''(√t)/(4t) − Φ'(√t)/(4t^{3/2})` in scaled form.
pub fn sqrt_arg_second_derivative(t: &Real) -> Result<EstimatedValue> {
    Ok(sqrt_arg_jet(t, 2)?.swap_remove(2))
}

/// Strict convexity of `Φ(√t)` on `n_grid` points of `(a, b]`.
pub fn sqrt_arg_convexity_check(interval: (f64, f64), n_grid: usize, p: Precision) -> Result<SignProbe> {
    if interval.0 < 0.0 {
        return Err(Error::InvalidInput("interval must lie in (0, inf)".into()));
    }
    let grid = open_closed_grid(interval.0, interval.1, n_grid);
    probe_grid("d2/dt2 Phi(sqrt t)", &grid, p, sqrt_arg_second_derivative)
}

/// `g(t) = t[(Φ')² − ΦΦ''] + ΦΦ'` in scaled form on `(a, b]`. Its positivity
/// is equivalent to strict concavity of `log Φ(√t)`.
pub fn g_function_check(interval: (f64, f64), n_grid: usize, p: Precision) -> Result<SignProbe> {
    let grid = open_closed_grid(interval.0, interval.1, n_grid);
    probe_grid("g(t)", &grid, p, |t| {
        let jet = theta_jet(t, 2)?;
        let s = &jet.scaled;
        let turan = s[1].mul(&s[1]).sub(&s[0].mul(&s[2]));
        Ok(turan.scale(t).add(&s[0].mul(&s[1])))
    })
}
