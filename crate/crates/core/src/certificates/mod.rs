//! SOS certificates for the identity
//!
//! ```text
//! x − v = q(x) + r(x)(1 − x²) + s(x)(x + (1−ε)x²)
//! ```
//!
//! with `q`, `r`, `s` given by Gram matrices in the monomial basis.

mod complete;
mod ineq;
mod json;
mod transforms;

use crate::linalg::{is_psd_exact, Matrix};
use crate::poly::UniPoly;
use crate::scalar::{BigScalar, Scalar, DEFAULT_PREC};

pub use complete::{
    complete_certificate, complete_certificate_with_gram, complete_certificate_with_value, extract_certificate,
    rationalize_certificate, sos_gram,
};
pub use ineq::{paulynomial, verify_ineq, IneqResult};
pub use json::{cert_from_json, cert_to_json, CERT_SCHEMA};
pub use transforms::{goursat_transform, lift_to_bivariate, markov_bound, LiftReport};

/// Residual bound under which a certificate counts as verified.
pub const RESIDUAL_TOL: f64 = 1e-20;
/// Smallest admissible Gram eigenvalue bound.
pub const MIN_EIG_TOL: f64 = -1e-25;

/// Gram matrix `G` of `z(x)ᵀ G z(x)` with `z = (1, x, …, x^m)`. A 0×0 matrix
/// stands for the zero polynomial of an empty basis.
#[derive(Clone, Debug, PartialEq)]
pub struct GramCertificate<T> {
    gram: Matrix<T>,
}

impl<T: Scalar> GramCertificate<T> {
    pub fn new(gram: Matrix<T>) -> Self {
        assert!(gram.is_square(), "Gram matrix must be square");
        GramCertificate { gram }
    }

    pub fn empty(like: &T) -> Self {
        GramCertificate {
            gram: Matrix::filled(0, 0, like.zero_like()),
        }
    }

    pub fn zeros(dim: usize, like: &T) -> Self {
        GramCertificate {
            gram: Matrix::filled(dim, dim, like.zero_like()),
        }
    }

    /// Gram `c cᵀ` of `p²`, where `c` holds the coefficients of `p` padded
    /// to `dim`.
    pub fn square_of(p: &UniPoly<T>, dim: usize, like: &T) -> Self {
        assert!(p.coeffs().len() <= dim, "basis too small for the square root");
        let mut c = vec![like.zero_like(); dim];
        for (k, a) in p.coeffs().iter().enumerate() {
            c[k] = a.clone();
        }
        let mut g = Matrix::filled(dim, dim, like.zero_like());
        for i in 0..dim {
            for j in 0..dim {
                g[(i, j)] = c[i].clone() * &c[j];
            }
        }
        GramCertificate { gram: g }
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    /// Highest basis exponent `m`; −1 for the empty basis.
    pub fn basis_degree(&self) -> isize {
        self.dim() as isize - 1
    }

    pub fn gram(&self) -> &Matrix<T> {
        &self.gram
    }

    pub fn gram_mut(&mut self) -> &mut Matrix<T> {
        &mut self.gram
    }

    pub fn to_poly(&self) -> UniPoly<T> {
        let n = self.dim();
        if n == 0 {
            return UniPoly::zero();
        }
        let zero = self.gram[(0, 0)].zero_like();
        let mut c = vec![zero; 2 * n - 1];
        for i in 0..n {
            for j in 0..n {
                c[i + j] = c[i + j].clone() + &self.gram[(i, j)];
            }
        }
        UniPoly::new(c)
    }

    /// `x^{2k}·σ`, realized by shifting the Gram down the diagonal.
    pub fn shifted(&self, k: usize, like: &T) -> Self {
        let n = self.dim();
        let mut g = Matrix::filled(n + k, n + k, like.zero_like());
        for i in 0..n {
            for j in 0..n {
                g[(i + k, j + k)] = self.gram[(i, j)].clone();
            }
        }
        GramCertificate { gram: g }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> GramCertificate<U> {
        GramCertificate { gram: self.gram.map(f) }
    }

    /// Lower bound on the smallest eigenvalue, evaluated in floating point.
    pub fn min_eig_bound(&self, prec: u32) -> Option<BigScalar> {
        (self.dim() > 0).then(|| self.gram.map(|c| c.to_big(prec)).psd_check())
    }
}

/// `x + (1−ε)x²`.
pub fn g_eps<T: Scalar>(eps: &T) -> UniPoly<T> {
    let one = eps.one_like();
    UniPoly::new(vec![eps.zero_like(), one.clone(), one - eps])
}

fn one_minus_x2<T: Scalar>(like: &T) -> UniPoly<T> {
    UniPoly::new(vec![like.one_like(), like.zero_like(), -like.one_like()])
}

/// Certificate of `x − v = q + r(1−x²) + s·g_ε`.
#[derive(Clone, Debug, PartialEq)]
pub struct SosDecomposition<T> {
    pub epsilon: T,
    pub v: T,
    pub q: GramCertificate<T>,
    pub r: GramCertificate<T>,
    pub s: GramCertificate<T>,
}

impl<T: Scalar> SosDecomposition<T> {
    /// Relaxation order `d`, read off the basis of `q`.
    pub fn order(&self) -> usize {
        self.q.dim().saturating_sub(1)
    }

    /// `x − v − q − r(1−x²) − s·g_ε`.
    pub fn defect(&self) -> UniPoly<T> {
        let like = &self.epsilon;
        let lhs = UniPoly::new(vec![-self.v.clone(), like.one_like()]);
        let rhs = &(&self.q.to_poly() + &(&self.r.to_poly() * &one_minus_x2(like)))
            + &(&self.s.to_poly() * &g_eps(&self.epsilon));
        &lhs - &rhs
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> SosDecomposition<U> {
        SosDecomposition {
            epsilon: f(&self.epsilon),
            v: f(&self.v),
            q: self.q.map(&f),
            r: self.r.map(&f),
            s: self.s.map(&f),
        }
    }

    fn grams(&self) -> [&GramCertificate<T>; 3] {
        [&self.q, &self.r, &self.s]
    }
}

/// Certificate of `x = q̃x² + r̃x²(1−x²) + s·g_ε`, the form forced when
/// `v = 0` (it implies `s(0) = 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDecomposition<T> {
    pub epsilon: T,
    pub q_tilde: GramCertificate<T>,
    pub r_tilde: GramCertificate<T>,
    pub s: GramCertificate<T>,
}

impl<T: Scalar> ReducedDecomposition<T> {
    pub fn defect(&self) -> UniPoly<T> {
        self.to_full().defect()
    }

    pub fn to_full(&self) -> SosDecomposition<T> {
        let like = &self.epsilon;
        SosDecomposition {
            epsilon: self.epsilon.clone(),
            v: like.zero_like(),
            q: self.q_tilde.shifted(1, like),
            r: self.r_tilde.shifted(1, like),
            s: self.s.clone(),
        }
    }

    /// The same certificate read at `ε + δ`: since `s·g_ε = s·g_{ε+δ} + δ·s·x²`,
    /// the Gram of `q̃` absorbs `δ` times the Gram of `s`.
    pub fn shift_epsilon(&self, delta: &T) -> Self {
        assert_eq!(self.q_tilde.dim(), self.s.dim(), "q̃ and s share a basis");
        let q = self.q_tilde.gram().add(&self.s.gram().scale(delta));
        ReducedDecomposition {
            epsilon: self.epsilon.clone() + delta,
            q_tilde: GramCertificate::new(q),
            r_tilde: self.r_tilde.clone(),
            s: self.s.clone(),
        }
    }
}

/// Outcome of [`verify_certificate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Verification<T> {
    /// Largest coefficient of the identity defect.
    pub residual: T,
    /// Smallest of the Gram eigenvalue bounds (0 when all bases are empty).
    pub min_gram_eig: BigScalar,
    /// Exact PSD test, available for exact scalar types.
    pub exact_psd: Option<bool>,
}

impl<T: Scalar> Verification<T> {
    /// Residual and eigenvalue bound within the default tolerances (and the
    /// exact PSD test, when there is one).
    pub fn passes(&self) -> bool {
        self.residual.to_f64() <= RESIDUAL_TOL
            && self.min_gram_eig.to_f64() >= MIN_EIG_TOL
            && self.exact_psd != Some(false)
    }
}

pub fn verify_certificate<T: Scalar>(c: &SosDecomposition<T>) -> Verification<T> {
    let residual = c
        .defect()
        .max_abs_coeff()
        .unwrap_or_else(|| c.epsilon.zero_like());
    let prec = c.epsilon.working_prec().unwrap_or(DEFAULT_PREC);
    let min_gram_eig = c
        .grams()
        .iter()
        .filter_map(|g| g.min_eig_bound(prec))
        .reduce(BigScalar::min)
        .unwrap_or_else(|| BigScalar::zero(prec));
    let exact_psd = T::EXACT.then(|| c.grams().iter().all(|g| is_psd_exact(g.gram())));
    Verification {
        residual,
        min_gram_eig,
        exact_psd,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{QuadraticSurd, Rational};

    fn rat(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn scalar_gram(c: Rational) -> GramCertificate<Rational> {
        GramCertificate::new(Matrix::from_rows(vec![vec![c]]))
    }

    fn first_order(eps: Rational) -> SosDecomposition<Rational> {
        let one = rat(1, 1);
        SosDecomposition {
            v: eps.clone() - &one,
            q: GramCertificate::zeros(2, &one),
            r: scalar_gram(one.clone() - &eps),
            s: scalar_gram(one),
            epsilon: eps,
        }
    }

    #[test]
    fn zero_epsilon_identity_is_exact() {
        let c = first_order(rat(0, 1));
        let v = verify_certificate(&c);
        assert!(v.residual.is_zero());
        assert_eq!(v.exact_psd, Some(true));
        assert!(v.passes());
    }

    #[test]
    fn generic_first_order_identity_is_exact() {
        for (n, d) in [(1, 3), (7, 10), (1, 1000)] {
            let c = first_order(rat(n, d));
            assert!(verify_certificate(&c).residual.is_zero());
        }
    }

    #[test]
    fn reduced_identity_at_eps2_is_exact_in_sqrt3() {
        let r3 = QuadraticSurd::root(3);
        let one = r3.one_like();
        let eps = one.clone() - &(r3.clone() / &r3.from_i64_like(2));
        let s = GramCertificate::new(Matrix::from_rows(vec![
            vec![one.clone(), -r3.clone()],
            vec![-r3.clone(), r3.from_i64_like(3)],
        ]));
        let rt = r3.clone() * &r3.from_i64_like(3) / &r3.from_i64_like(2);
        let red = ReducedDecomposition {
            epsilon: eps,
            q_tilde: GramCertificate::zeros(2, &one),
            r_tilde: GramCertificate::new(Matrix::from_rows(vec![vec![rt]])),
            s,
        };
        let v = verify_certificate(&red.to_full());
        assert!(v.residual.is_zero(), "{:?}", v.residual);
        assert_eq!(v.exact_psd, Some(true));
    }

    #[test]
    fn perturbed_gram_entry_shows_in_residual() {
        let mut c = first_order(rat(1, 4));
        let delta = rat(1, 1000);
        let g = c.q.gram_mut();
        g[(0, 1)] = g[(0, 1)].clone() + &delta;
        g[(1, 0)] = g[(1, 0)].clone() + &delta;
        let res = verify_certificate(&c).residual;
        assert!(res >= delta / rat(4, 1));
    }

    #[test]
    fn shifted_reduced_certificate_reverifies() {
        // ε = 1: x = 0·x² + s·x with s = 1.
        let one = rat(1, 1);
        let red = ReducedDecomposition {
            epsilon: one.clone(),
            q_tilde: GramCertificate::zeros(1, &one),
            r_tilde: GramCertificate::empty(&one),
            s: scalar_gram(one.clone()),
        };
        assert!(red.defect().is_zero());
        let back = red.shift_epsilon(&rat(-1, 2));
        // shifting down is the reverse direction and must fail the PSD test
        assert_eq!(verify_certificate(&back.to_full()).exact_psd, Some(false));
        assert!(back.defect().is_zero());
    }

    #[test]
    fn gram_to_poly_and_square() {
        let p = UniPoly::new(vec![rat(-1, 1), rat(1, 1)]);
        let g = GramCertificate::square_of(&p, 3, &rat(1, 1));
        assert_eq!(g.to_poly(), &p * &p);
        assert_eq!(g.basis_degree(), 2);
        assert!(GramCertificate::empty(&rat(0, 1)).to_poly().is_zero());
    }
}
