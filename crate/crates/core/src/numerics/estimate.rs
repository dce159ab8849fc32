//! Values paired with absolute error bounds.

use std::fmt;

use serde::ser::SerializeStruct;
use serde::Serialize;

use super::real::Real;
use crate::error::{Error, Result};

/// A computed real with an absolute error bound.
///
/// Both fields are finite and `abs_error_bound >= 0`; constructors reject
/// NaN and infinities.
#[derive(Clone, PartialEq)]
pub struct EstimatedValue {
    pub value: Real,
    pub abs_error_bound: Real,
}

impl EstimatedValue {
    pub fn new(value: Real, abs_error_bound: Real) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFinite(format!("value {value:?}")));
        }
        if !abs_error_bound.is_finite() || abs_error_bound.is_negative() {
            return Err(Error::NonFinite(format!(
                "error bound {abs_error_bound:?}"
            )));
        }
        Ok(EstimatedValue {
            value,
            abs_error_bound,
        })
    }

    /// An exactly known value (bound zero).
    pub fn exact(value: Real) -> Self {
        let zero = value.zero_like();
        EstimatedValue {
            value,
            abs_error_bound: zero,
        }
    }

    pub fn lower(&self) -> Real {
        &self.value - &self.abs_error_bound
    }

    pub fn upper(&self) -> Real {
        &self.value + &self.abs_error_bound
    }

    /// Signed margin by which the sign of the value is certified: positive
    /// iff `|value| > bound`.
    pub fn margin(&self) -> Real {
        self.value.abs() - &self.abs_error_bound
    }

    pub fn certified_positive(&self) -> bool {
        self.lower().is_positive()
    }

    pub fn certified_negative(&self) -> bool {
        self.upper().is_negative()
    }

    /// Sign certified by the bound: `Some(1)`, `Some(-1)`, or `None` when the
    /// interval straddles zero.
    pub fn certified_sign(&self) -> Option<i32> {
        if self.certified_positive() {
            Some(1)
        } else if self.certified_negative() {
            Some(-1)
        } else {
            None
        }
    }

    /// Whether `|self - other|` is within the combined bounds (plus `slack`).
    pub fn agrees_with(&self, other: &EstimatedValue, slack: f64) -> bool {
        let diff = (&self.value - &other.value).abs();
        diff <= &self.abs_error_bound + &other.abs_error_bound + slack
    }

    pub fn scale(&self, c: &Real) -> EstimatedValue {
        EstimatedValue {
            value: &self.value * c,
            abs_error_bound: &self.abs_error_bound * c.abs(),
        }
    }

    /// Multiplies by `exp(ln_c)`, adding the rounding of the exponential:
    /// an argument carrying relative error `ε` shifts the result by
    /// `|ln_c| ε` relatively.
    pub fn scale_by_exp(&self, ln_c: &Real) -> EstimatedValue {
        let c = ln_c.exp();
        let eps = ln_c.zero_like().same_prec(2.0).powi(2 - ln_c.prec() as i32);
        let rounding = (&self.value * &c).abs() * (ln_c.abs() + 1.0) * eps;
        EstimatedValue {
            value: &self.value * &c,
            abs_error_bound: &self.abs_error_bound * &c + rounding,
        }
    }

    pub fn add(&self, other: &EstimatedValue) -> EstimatedValue {
        EstimatedValue {
            value: &self.value + &other.value,
            abs_error_bound: &self.abs_error_bound + &other.abs_error_bound,
        }
    }

    pub fn sub(&self, other: &EstimatedValue) -> EstimatedValue {
        EstimatedValue {
            value: &self.value - &other.value,
            abs_error_bound: &self.abs_error_bound + &other.abs_error_bound,
        }
    }

    /// Product with first-order error propagation.
    pub fn mul(&self, other: &EstimatedValue) -> EstimatedValue {
        let bound = self.value.abs() * &other.abs_error_bound
            + other.value.abs() * &self.abs_error_bound
            + &self.abs_error_bound * &other.abs_error_bound;
        EstimatedValue {
            value: &self.value * &other.value,
            abs_error_bound: bound,
        }
    }

    /// Quotient with first-order error propagation. The caller ensures the
    /// denominator is bounded away from zero.
    pub fn div(&self, other: &EstimatedValue) -> EstimatedValue {
        let q = &self.value / &other.value;
        let denom = other.value.abs() - &other.abs_error_bound;
        let bound = if denom.is_positive() {
            (&self.abs_error_bound + q.abs() * &other.abs_error_bound) / denom
        } else {
            q.abs().same_prec(f64::INFINITY)
        };
        EstimatedValue {
            value: q,
            abs_error_bound: bound,
        }
    }

    pub fn neg(&self) -> EstimatedValue {
        EstimatedValue {
            value: -&self.value,
            abs_error_bound: self.abs_error_bound.clone(),
        }
    }

    pub fn value_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn bound_f64(&self) -> f64 {
        self.abs_error_bound.to_f64()
    }

    pub fn with_extra_bound(mut self, extra: &Real) -> EstimatedValue {
        self.abs_error_bound += extra.abs();
        self
    }
}

impl Serialize for EstimatedValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("EstimatedValue", 2)?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("abs_error_bound", &self.abs_error_bound.to_decimal(6))?;
        st.end()
    }
}

impl fmt::Debug for EstimatedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ± {}",
            self.value.to_decimal(20),
            self.abs_error_bound.to_decimal(3)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Precision;

    #[test]
    fn rejects_non_finite() {
        let p = Precision::DEFAULT;
        assert!(EstimatedValue::new(p.real(f64::NAN), p.zero()).is_err());
        assert!(EstimatedValue::new(p.one(), p.real(f64::INFINITY)).is_err());
        assert!(EstimatedValue::new(p.one(), p.real(-1.0)).is_err());
        assert!(EstimatedValue::new(p.one(), p.zero()).is_ok());
    }

    #[test]
    fn product_bound_is_first_order() {
        let p = Precision::DEFAULT;
        let a = EstimatedValue::new(p.real(2.0), p.real(0.01)).unwrap();
        let b = EstimatedValue::new(p.real(-3.0), p.real(0.02)).unwrap();
        let c = a.mul(&b);
        assert_eq!(c.value_f64(), -6.0);
        assert!((c.bound_f64() - (0.04 + 0.03 + 0.0002)).abs() < 1e-15);
        assert_eq!(c.certified_sign(), Some(-1));
    }

    #[test]
    fn straddling_interval_has_no_certified_sign() {
        let p = Precision::DEFAULT;
        let a = EstimatedValue::new(p.real(1e-10), p.real(1e-9)).unwrap();
        assert_eq!(a.certified_sign(), None);
        assert!(a.margin().is_negative());
    }
}
