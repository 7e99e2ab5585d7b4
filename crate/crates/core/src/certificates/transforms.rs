use crate::bipoly::BiPoly;
use crate::error::CertError;
use crate::poly::UniPoly;
use crate::scalar::{BigScalar, Scalar};

use super::SosDecomposition;

/// `(1+x²)^{2m}·t((x²−1)/(1+x²))`, computed as
/// `Σ t_k (x²−1)^k (1+x²)^{2m−k}`. Nonnegative on ℝ exactly when `t` is
/// nonnegative on `[−1,1]`.
pub fn goursat_transform<T: Scalar>(t: &UniPoly<T>, m: usize) -> Result<UniPoly<T>, CertError> {
    let deg = t.degree();
    if deg > 2 * m as isize {
        return Err(CertError::Poly(crate::error::PolyError::DegreeTooHigh {
            degree: deg as usize,
            limit: 2 * m,
        }));
    }
    let Some(like) = t.coeffs().first() else {
        return Ok(UniPoly::zero());
    };
    let one = like.one_like();
    let zero = like.zero_like();
    let num = UniPoly::new(vec![-one.clone(), zero.clone(), one.clone()]);
    let den = UniPoly::new(vec![one.clone(), zero, one.clone()]);
    let mut acc = UniPoly::zero();
    for (k, c) in t.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let term = &num.pow(k as u32) * &den.pow((2 * m - k) as u32);
        acc = &acc + &term.scale(c);
    }
    Ok(acc)
}

/// `((4e)^{2d}, 1 + 2d·(4e)^{2d})`: the coefficient bound for nonnegative
/// `s` on `[0,1]` normalized by its values at `j/2d`, and the resulting bound
/// on `s(−1)`.
pub fn markov_bound(d: usize, prec: u32) -> (BigScalar, BigScalar) {
    let four_e = BigScalar::e(prec).mul_i64(4);
    let coeff = four_e.powi(2 * d as i32);
    let eval = coeff.mul_i64(2 * d as i64) + BigScalar::one(prec);
    (coeff, eval)
}

/// The bivariate identity
/// `x₁ − v = q + r·x₂² + (r − (1−ε)s)(1 − x₁² − x₂²) + s(1 − ε + x₁ − (1−ε)x₂²)`
/// built from a univariate certificate, with `q, r, s` in `x₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftReport<T> {
    pub q: BiPoly<T>,
    pub r_x2sq: BiPoly<T>,
    pub equality_term: BiPoly<T>,
    pub inequality_term: BiPoly<T>,
    /// `r − (1−ε)s`, the (sign-free) multiplier of the circle equation.
    pub equality_multiplier: BiPoly<T>,
    /// Largest coefficient of `x₁ − v` minus the four terms.
    pub defect: T,
}

pub fn lift_to_bivariate<T: Scalar>(c: &SosDecomposition<T>) -> LiftReport<T> {
    let like = &c.epsilon;
    let one = like.one_like();
    let eta = one.clone() - &c.epsilon;
    let q = BiPoly::from_x1(&c.q.to_poly());
    let r = BiPoly::from_x1(&c.r.to_poly());
    let s = BiPoly::from_x1(&c.s.to_poly());
    let x2sq = BiPoly::from_terms([((0, 2), one.clone())]);
    let circle = BiPoly::from_terms([((0, 0), one.clone()), ((2, 0), -one.clone()), ((0, 2), -one.clone())]);
    let parabola = BiPoly::from_terms([((0, 0), eta.clone()), ((1, 0), one.clone()), ((0, 2), -eta.clone())]);
    let equality_multiplier = &r - &s.scale(&eta);
    let r_x2sq = &r * &x2sq;
    let equality_term = &equality_multiplier * &circle;
    let inequality_term = &s * &parabola;
    let lhs = BiPoly::from_terms([((1, 0), one.clone()), ((0, 0), -c.v.clone())]);
    let rhs = &(&(&q + &r_x2sq) + &equality_term) + &inequality_term;
    let defect = (&lhs - &rhs).max_abs_coeff().unwrap_or_else(|| like.zero_like());
    LiftReport {
        q,
        r_x2sq,
        equality_term,
        inequality_term,
        equality_multiplier,
        defect,
    }
}
