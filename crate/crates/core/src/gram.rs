//! Coefficient-matching systems `Σ_k m_k·σ_k + Σ_j τ_j·p_j = target`, with
//! `σ_k` given by Gram matrices over monomial bases and `τ_j` free scalars.

use std::collections::BTreeMap;

use crate::bipoly::{BiPoly, Exponent};
use crate::linalg::Matrix;
use crate::scalar::{BigScalar, Scalar};
use crate::sdp::{AffineBlock, LinearEquality, SdpProblem};

/// Upper-triangular Gram entries laid out row by row from `offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramVars {
    pub offset: usize,
    pub basis: Vec<Exponent>,
}

impl GramVars {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn count(&self) -> usize {
        let n = self.dim();
        n * (n + 1) / 2
    }

    pub fn var(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let n = self.dim();
        self.offset + i * n - i * i.saturating_sub(1) / 2 + (j - i)
    }

    pub fn block(&self, prec: u32) -> AffineBlock {
        let mut b = AffineBlock::new(self.dim(), prec);
        let one = BigScalar::one(prec);
        for i in 0..self.dim() {
            for j in i..self.dim() {
                b.add_coeff(self.var(i, j), i, j, &one);
            }
        }
        b
    }

    pub fn matrix(&self, y: &[BigScalar]) -> Matrix<BigScalar> {
        let n = self.dim();
        let prec = y.first().map_or(crate::scalar::DEFAULT_PREC, BigScalar::prec);
        let mut m = Matrix::zeros(n, n, prec);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = y[self.var(i, j)].clone();
            }
        }
        m
    }
}

/// Univariate basis `1, x, …, x^m`.
pub fn univariate_basis(m: usize) -> Vec<Exponent> {
    (0..=m as u32).map(|k| (k, 0)).collect()
}

#[derive(Clone, Debug)]
pub struct SosSystem {
    prec: u32,
    num_vars: usize,
    grams: Vec<(GramVars, BiPoly<BigScalar>)>,
    free: Vec<(usize, BiPoly<BigScalar>)>,
    target: BiPoly<BigScalar>,
}

impl SosSystem {
    pub fn new(target: BiPoly<BigScalar>, prec: u32) -> Self {
        SosSystem {
            prec,
            num_vars: 0,
            grams: Vec::new(),
            free: Vec::new(),
            target,
        }
    }

    /// Adds `multiplier · σ` with `σ` SOS over `basis`; returns the Gram index.
    pub fn add_gram(&mut self, basis: Vec<Exponent>, multiplier: BiPoly<BigScalar>) -> usize {
        let g = GramVars {
            offset: self.num_vars,
            basis,
        };
        self.num_vars += g.count();
        self.grams.push((g, multiplier));
        self.grams.len() - 1
    }

    /// Adds `τ · poly` with a free scalar `τ`; returns the variable index.
    pub fn add_free(&mut self, poly: BiPoly<BigScalar>) -> usize {
        let v = self.num_vars;
        self.num_vars += 1;
        self.free.push((v, poly));
        v
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn gram(&self, k: usize) -> &GramVars {
        &self.grams[k].0
    }

    pub fn grams(&self) -> impl Iterator<Item = &GramVars> {
        self.grams.iter().map(|(g, _)| g)
    }

    /// Linear coefficient rows, one per monomial.
    fn rows(&self) -> BTreeMap<Exponent, BTreeMap<usize, BigScalar>> {
        let mut rows: BTreeMap<Exponent, BTreeMap<usize, BigScalar>> = BTreeMap::new();
        let mut add = |e: Exponent, v: usize, c: BigScalar| {
            let row = rows.entry(e).or_default();
            match row.get_mut(&v) {
                Some(x) => *x += c,
                None => {
                    row.insert(v, c);
                }
            }
        };
        for (g, mult) in &self.grams {
            let n = g.dim();
            for i in 0..n {
                for j in i..n {
                    let (a, b) = (g.basis[i], g.basis[j]);
                    let k = if i == j { 1 } else { 2 };
                    for (&(p, q), c) in mult.terms() {
                        add((a.0 + b.0 + p, a.1 + b.1 + q), g.var(i, j), c.mul_i64(k));
                    }
                }
            }
        }
        for (v, poly) in &self.free {
            for (&e, c) in poly.terms() {
                add(e, *v, c.clone());
            }
        }
        for (&e, _) in self.target.terms() {
            rows.entry(e).or_default();
        }
        rows
    }

    /// Feasibility problem: one block per Gram, one equality per monomial.
    /// The objective is left at zero.
    pub fn to_problem(&self) -> SdpProblem {
        let prec = self.prec;
        let mut p = SdpProblem::new(self.num_vars, prec);
        for (g, _) in &self.grams {
            if g.dim() > 0 {
                p.blocks.push(g.block(prec));
            }
        }
        for (e, row) in self.rows() {
            let rhs = self
                .target
                .coeff(e)
                .cloned()
                .unwrap_or_else(|| BigScalar::zero(prec));
            let coeffs: Vec<(usize, BigScalar)> =
                row.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            p.equalities.push(LinearEquality { coeffs, rhs });
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_indexing_is_dense_and_unique() {
        let g = GramVars {
            offset: 5,
            basis: univariate_basis(3),
        };
        let mut seen = std::collections::BTreeSet::new();
        for i in 0..4 {
            for j in i..4 {
                assert_eq!(g.var(i, j), g.var(j, i));
                seen.insert(g.var(i, j));
            }
        }
        assert_eq!(seen.len(), g.count());
        assert_eq!(*seen.iter().next().unwrap(), 5);
        assert_eq!(*seen.iter().last().unwrap(), 5 + g.count() - 1);
    }

    #[test]
    fn square_identity_system() {
        // (1 + x)^2 = σ with σ over {1, x}: a unique Gram [[1,1],[1,1]].
        let prec = 128;
        let one = BigScalar::one(prec);
        let target = BiPoly::from_terms([((0, 0), one.clone()), ((1, 0), one.mul_i64(2)), ((2, 0), one.clone())]);
        let mut sys = SosSystem::new(target, prec);
        sys.add_gram(univariate_basis(1), BiPoly::constant(one.clone()));
        let p = sys.to_problem();
        assert_eq!(p.num_vars, 3);
        assert_eq!(p.equalities.len(), 3);
        let y = vec![one.clone(), one.clone(), one.clone()];
        assert!(p.equality_residual(&y).is_zero());
    }
}
