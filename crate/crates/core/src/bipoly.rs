//! Sparse polynomials in two variables `x1`, `x2`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::poly::UniPoly;
use crate::scalar::Scalar;

pub type Exponent = (u32, u32);

/// Map from exponent pairs to nonzero coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct BiPoly<T> {
    terms: BTreeMap<Exponent, T>,
}

impl<T: Scalar> BiPoly<T> {
    pub fn zero() -> Self {
        BiPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Exponent, T)>) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn constant(c: T) -> Self {
        Self::from_terms([((0, 0), c)])
    }

    /// `x1` (index 0) or `x2` (index 1).
    pub fn var(index: usize, like: &T) -> Self {
        let e = if index == 0 { (1, 0) } else { (0, 1) };
        Self::from_terms([(e, like.one_like())])
    }

    /// Embeds a polynomial in `x1`.
    pub fn from_x1(p: &UniPoly<T>) -> Self {
        Self::from_terms(
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| ((k as u32, 0), c.clone())),
        )
    }

    /// Embeds a polynomial in `x2`.
    pub fn from_x2(p: &UniPoly<T>) -> Self {
        Self::from_terms(
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| ((0, k as u32), c.clone())),
        )
    }

    pub fn add_term(&mut self, e: Exponent, c: T) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&e) {
            Some(old) => {
                let s = old + &c;
                if !s.is_zero() {
                    self.terms.insert(e, s);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn coeff(&self, e: Exponent) -> Option<&T> {
        self.terms.get(&e)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &T)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> isize {
        self.terms
            .keys()
            .map(|(a, b)| (a + b) as isize)
            .max()
            .unwrap_or(-1)
    }

    /// Whether `x2` never appears.
    pub fn is_univariate_x1(&self) -> bool {
        self.terms.keys().all(|&(_, b)| b == 0)
    }

    pub fn eval(&self, x1: &T, x2: &T) -> T {
        let mut acc = x1.zero_like();
        for (&(a, b), c) in &self.terms {
            let mut t = c.clone();
            for _ in 0..a {
                t = t * x1;
            }
            for _ in 0..b {
                t = t * x2;
            }
            acc = acc + &t;
        }
        acc
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, v)| (*e, v.clone() * c)))
    }

    /// Multiplies by the monomial `x1^a x2^b`.
    pub fn shift(&self, (a, b): Exponent) -> Self {
        BiPoly {
            terms: self
                .terms
                .iter()
                .map(|(&(i, j), c)| ((i + a, j + b), c.clone()))
                .collect(),
        }
    }

    pub fn max_abs_coeff(&self) -> Option<T> {
        let mut it = self.terms.values();
        let mut m = it.next()?.abs();
        for c in it {
            let a = c.abs();
            if a > m {
                m = a;
            }
        }
        Some(m)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> BiPoly<U> {
        BiPoly::from_terms(self.terms.iter().map(|(e, c)| (*e, f(c))))
    }
}

impl<T: Scalar> Add for &BiPoly<T> {
    type Output = BiPoly<T>;
    fn add(self, rhs: &BiPoly<T>) -> BiPoly<T> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl<T: Scalar> Neg for &BiPoly<T> {
    type Output = BiPoly<T>;
    fn neg(self) -> BiPoly<T> {
        BiPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }
}

impl<T: Scalar> Sub for &BiPoly<T> {
    type Output = BiPoly<T>;
    fn sub(self, rhs: &BiPoly<T>) -> BiPoly<T> {
        self + &(-rhs)
    }
}

impl<T: Scalar> Mul for &BiPoly<T> {
    type Output = BiPoly<T>;
    fn mul(self, rhs: &BiPoly<T>) -> BiPoly<T> {
        let mut out = BiPoly::zero();
        for (&(a, b), c) in &self.terms {
            for (&(i, j), d) in &rhs.terms {
                out.add_term((a + i, b + j), c.clone() * d);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(v: i64) -> Rational {
        Rational::from(v)
    }

    #[test]
    fn zeros_are_never_stored() {
        let x = BiPoly::var(0, &r(1));
        let d = &x - &x;
        assert!(d.is_zero());
        assert_eq!(d.total_degree(), -1);
    }

    #[test]
    fn circle_product() {
        let x1 = BiPoly::var(0, &r(1));
        let x2 = BiPoly::var(1, &r(1));
        let h = &(&BiPoly::constant(r(1)) - &(&x1 * &x1)) - &(&x2 * &x2);
        assert_eq!(h.total_degree(), 2);
        assert_eq!(h.eval(&Rational::from((3, 5)), &Rational::from((4, 5))), r(0));
        let h2 = &h * &h;
        assert_eq!(h2.coeff((2, 2)), Some(&r(2)));
        assert_eq!(h2.total_degree(), 4);
    }

    #[test]
    fn embedding_matches_univariate() {
        let p = UniPoly::new(vec![r(1), r(-2), r(3)]);
        let b = BiPoly::from_x1(&p);
        assert!(b.is_univariate_x1());
        assert_eq!(b.eval(&r(2), &r(7)), p.eval(&r(2)));
    }
}
