//! Functions of the form `e^{c t²} p(t)` with exact symbolic derivatives.

use super::real::{Precision, Real};

/// `e^{c t²} · Σ coeffs[k] t^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpPoly {
    pub c: Real,
    pub coeffs: Vec<Real>,
}

impl ExpPoly {
    pub fn new(c: Real, coeffs: Vec<Real>) -> Self {
        let mut e = ExpPoly { c, coeffs };
        e.trim();
        e
    }

    pub fn polynomial(coeffs: Vec<Real>, p: Precision) -> Self {
        ExpPoly::new(p.zero(), coeffs)
    }

    /// Monic polynomial with the given real roots.
    pub fn from_roots(roots: &[Real], p: Precision) -> Self {
        let mut coeffs = vec![p.one()];
        for r in roots {
            coeffs = poly_mul(&coeffs, &[-r, p.one()], p);
        }
        ExpPoly::polynomial(coeffs, p)
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && self.coeffs.last().is_some_and(Real::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// `d/dt [e^{ct²} p] = e^{ct²} (p' + 2ctp)`.
    pub fn derivative(&self) -> ExpPoly {
        let n = self.coeffs.len();
        let zero = self.c.zero_like();
        let mut out = vec![zero.clone(); n + 1];
        for (k, a) in self.coeffs.iter().enumerate() {
            if k >= 1 {
                out[k - 1] += a * k as f64;
            }
            out[k + 1] += a * &self.c * 2.0;
        }
        ExpPoly::new(self.c.clone(), out)
    }

    pub fn nth_derivative(&self, n: usize) -> ExpPoly {
        let mut d = self.clone();
        for _ in 0..n {
            d = d.derivative();
        }
        d
    }

    pub fn poly_at(&self, t: &Real) -> Real {
        let mut acc = t.zero_like();
        for a in self.coeffs.iter().rev() {
            acc = acc * t + a;
        }
        acc
    }

    pub fn eval(&self, t: &Real) -> Real {
        let poly = self.poly_at(t);
        if self.c.is_zero() {
            poly
        } else {
            poly * (&self.c * t.square()).exp()
        }
    }

    pub fn mul(&self, other: &ExpPoly, p: Precision) -> ExpPoly {
        ExpPoly::new(&self.c + &other.c, poly_mul(&self.coeffs, &other.coeffs, p))
    }

    /// True when only even powers of t appear.
    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(Real::is_zero)
    }
}

fn poly_mul(a: &[Real], b: &[Real], p: Precision) -> Vec<Real> {
    let mut out = vec![p.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_derivatives_are_hermite() {
        let p = Precision::DEFAULT;
        let g = ExpPoly::new(p.real(-1.0), vec![p.one()]);
        // d²/dt² e^{-t²} = (4t² - 2) e^{-t²}.
        let d2 = g.nth_derivative(2);
        let want = [-2.0, 0.0, 4.0];
        assert_eq!(d2.coeffs.len(), 3);
        for (a, w) in d2.coeffs.iter().zip(want) {
            assert_eq!(a.to_f64(), w);
        }
    }

    #[test]
    fn roots_round_trip() {
        let p = Precision::DEFAULT;
        let roots = [p.real(-1.5), p.real(0.25), p.real(2.0)];
        let f = ExpPoly::from_roots(&roots, p);
        for r in &roots {
            assert!(f.eval(r).abs() < 1e-28);
        }
        assert_eq!(f.degree(), 3);
    }

    #[test]
    fn evenness_detection() {
        let p = Precision::DEFAULT;
        let e = ExpPoly::new(p.real(-1.0), vec![p.real(15.0), p.zero(), p.one(), p.zero(), p.one()]);
        assert!(e.is_even());
        assert!(!e.derivative().is_even());
    }
}
