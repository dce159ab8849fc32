//! Configurable-precision real scalar.
//!
//! [`Real`] wraps an MPFR float. Binary operations produce a result at the
//! larger of the two operand precisions, so values created from a single
//! [`Precision`] stay at that precision throughout a computation.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

/// Working precision expressed in significant decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Precision {
    digits: u32,
}

/// Extra binary digits carried beyond the requested decimal precision.
const GUARD_BITS: u32 = 24;

impl Precision {
    /// Standard double-equivalent precision, for exploratory runs.
    pub const DOUBLE: Precision = Precision { digits: 15 };
    pub const DEFAULT: Precision = Precision { digits: 30 };

    pub fn digits(digits: u32) -> Self {
        Precision {
            digits: digits.max(1),
        }
    }

    /// The precision whose bit count does not exceed that of `x`.
    pub fn of(x: &Real) -> Precision {
        let bits = x.prec().saturating_sub(GUARD_BITS);
        Precision::digits((f64::from(bits) / std::f64::consts::LOG2_10).floor() as u32)
    }

    pub fn decimal_digits(&self) -> u32 {
        self.digits
    }

    pub fn bits(&self) -> u32 {
        (f64::from(self.digits) * std::f64::consts::LOG2_10).ceil() as u32 + GUARD_BITS
    }

    /// Unit roundoff of the working precision.
    pub fn epsilon(&self) -> f64 {
        2f64.powi(-(self.bits() as i32))
    }

    pub fn real(&self, v: f64) -> Real {
        Real(Float::with_val(self.bits(), v))
    }

    pub fn int(&self, v: i64) -> Real {
        Real(Float::with_val(self.bits(), v))
    }

    pub fn int128(&self, v: i128) -> Real {
        Real(Float::with_val(self.bits(), v))
    }

    pub fn zero(&self) -> Real {
        Real(Float::new(self.bits()))
    }

    pub fn one(&self) -> Real {
        self.int(1)
    }

    pub fn pi(&self) -> Real {
        Real(Float::with_val(self.bits(), Constant::Pi))
    }

    /// Parses a decimal literal at this precision, so that values such as
    /// `0.1` are exact to the working precision rather than to a double.
    pub fn parse(&self, s: &str) -> Option<Real> {
        Float::parse(s)
            .ok()
            .map(|p| Real(Float::with_val(self.bits(), p)))
    }

    /// `n!` as a real.
    pub fn factorial(&self, n: u32) -> Real {
        let mut acc = self.one();
        for k in 2..=n {
            acc *= f64::from(k);
        }
        acc
    }

    pub fn binomial(&self, n: u32, k: u32) -> Real {
        if k > n {
            return self.zero();
        }
        let k = k.min(n - k);
        let mut acc = self.one();
        for i in 0..k {
            acc *= f64::from(n - i);
            acc /= f64::from(i + 1);
        }
        acc
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::DEFAULT
    }
}

/// Multiprecision real number.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Real(Float);

impl Real {
    pub fn from_float(f: Float) -> Self {
        Real(f)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// A real at the same precision as `self`.
    pub fn same_prec(&self, v: f64) -> Real {
        Real(Float::with_val(self.prec(), v))
    }

    pub fn zero_like(&self) -> Real {
        Real(Float::new(self.prec()))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.cmp0() == Some(Ordering::Greater)
    }

    pub fn is_negative(&self) -> bool {
        self.0.cmp0() == Some(Ordering::Less)
    }

    /// Sign as -1, 0 or 1 (0 for NaN).
    pub fn signum_i(&self) -> i32 {
        match self.0.cmp0() {
            Some(Ordering::Greater) => 1,
            Some(Ordering::Less) => -1,
            _ => 0,
        }
    }

    pub fn abs(&self) -> Real {
        Real(self.0.clone().abs())
    }

    pub fn exp(&self) -> Real {
        Real(self.0.clone().exp())
    }

    pub fn ln(&self) -> Real {
        Real(self.0.clone().ln())
    }

    pub fn sqrt(&self) -> Real {
        Real(self.0.clone().sqrt())
    }

    pub fn sin(&self) -> Real {
        Real(self.0.clone().sin())
    }

    pub fn cos(&self) -> Real {
        Real(self.0.clone().cos())
    }

    /// `(sin, cos)` computed together.
    pub fn sin_cos(&self) -> (Real, Real) {
        let (s, c) = self.0.clone().sin_cos(Float::new(self.prec()));
        (Real(s), Real(c))
    }

    /// `(sinh, cosh)` computed together.
    pub fn sinh_cosh(&self) -> (Real, Real) {
        let (s, c) = self.0.clone().sinh_cosh(Float::new(self.prec()));
        (Real(s), Real(c))
    }

    pub fn powi(&self, n: i32) -> Real {
        Real(self.0.clone().pow(n))
    }

    pub fn square(&self) -> Real {
        Real(self.0.clone().square())
    }

    pub fn max(self, other: Real) -> Real {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Real) -> Real {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Rounds to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Real {
        Real(Float::with_val(prec, &self.0))
    }

    /// Natural logarithm of `|self|` as a double. Useful for magnitudes far
    /// outside the double range; returns `-inf` for zero.
    pub fn ln_abs_f64(&self) -> f64 {
        if self.0.is_zero() {
            return f64::NEG_INFINITY;
        }
        let (mant, exp) = self.0.to_f64_exp();
        mant.abs().ln() + f64::from(exp) * std::f64::consts::LN_2
    }

    /// Scientific decimal rendering `d.ddd…e±N` with `digits` significant
    /// digits.
    pub fn to_decimal(&self, digits: u32) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        if !self.0.is_finite() {
            return self.0.to_string();
        }
        let (neg, m, exp) = self.0.to_sign_string_exp(10, Some(digits.max(1) as usize));
        let exp = exp.expect("finite nonzero value has an exponent") - 1;
        let sign = if neg { "-" } else { "" };
        let (head, tail) = m.split_at(1);
        if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        }
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(20))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(17) as u32;
        write!(f, "{}", self.to_decimal(digits))
    }
}

/// Serialized as a decimal string carrying every significant digit of the
/// working precision, so reports round-trip deterministically.
impl Serialize for Real {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_decimal(Precision::of(self).decimal_digits()))
    }
}

impl PartialEq<f64> for Real {
    fn eq(&self, other: &f64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<f64> for Real {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

fn prec2(a: &Real, b: &Real) -> u32 {
    a.prec().max(b.prec())
}

macro_rules! real_binop {
    ($tr:ident, $method:ident, $atr:ident, $amethod:ident, $op:tt) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                Real(Float::with_val(prec2(self, rhs), &self.0 $op &rhs.0))
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self $op &rhs
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                &self $op rhs
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                &self $op &rhs
            }
        }
        impl $tr<f64> for &Real {
            type Output = Real;
            fn $method(self, rhs: f64) -> Real {
                Real(Float::with_val(self.prec(), &self.0 $op rhs))
            }
        }
        impl $tr<f64> for Real {
            type Output = Real;
            fn $method(self, rhs: f64) -> Real {
                &self $op rhs
            }
        }
        impl $atr<&Real> for Real {
            fn $amethod(&mut self, rhs: &Real) {
                *self = &*self $op rhs;
            }
        }
        impl $atr<Real> for Real {
            fn $amethod(&mut self, rhs: Real) {
                *self = &*self $op &rhs;
            }
        }
        impl $atr<f64> for Real {
            fn $amethod(&mut self, rhs: f64) {
                self.0 = Float::with_val(self.prec(), &self.0 $op rhs);
            }
        }
    };
}

real_binop!(Add, add, AddAssign, add_assign, +);
real_binop!(Sub, sub, SubAssign, sub_assign, -);
real_binop!(Mul, mul, MulAssign, mul_assign, *);
real_binop!(Div, div, DivAssign, div_assign, /);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0.clone())
    }
}

impl<'a> Sum<&'a Real> for Real {
    /// Sums a nonempty iterator. Panics on an empty one, since the result
    /// precision would be undefined.
    fn sum<I: Iterator<Item = &'a Real>>(mut iter: I) -> Real {
        let mut acc = iter.next().expect("sum of empty Real iterator").clone();
        for x in iter {
            acc += x;
        }
        acc
    }
}

impl Sum<Real> for Real {
    /// Sums a nonempty iterator. Panics on an empty one.
    fn sum<I: Iterator<Item = Real>>(mut iter: I) -> Real {
        let mut acc = iter.next().expect("sum of empty Real iterator");
        for x in iter {
            acc += x;
        }
        acc
    }
}
