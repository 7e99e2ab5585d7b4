//! Moment relaxations and their dual SOS programs for the parametric
//! problem
//!
//! ```text
//! min x   s.t.  1 − x² ≥ 0,  x + (1−ε)x² ≥ 0                  (univariate)
//! min x₁  s.t.  x₁² + x₂² = 1,  1 − ε + x₁ − (1−ε)x₂² ≥ 0     (bivariate)
//! ```

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::bipoly::{BiPoly, Exponent};
use crate::error::RelaxationError;
use crate::gram::{SosSystem, GramVars};
use crate::linalg::Matrix;
use crate::poly::chebyshev_power_matrix;
use crate::scalar::{BigScalar, Scalar};
use crate::sdp::{sdp_solve, AffineBlock, LinearEquality, SdpProblem, SdpSolution, SdpStatus, SolverParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Variant {
    Univariate4,
    Bivariate3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamPop {
    epsilon: BigScalar,
    variant: Variant,
}

impl ParamPop {
    pub fn new(epsilon: BigScalar, variant: Variant) -> Result<Self, RelaxationError> {
        check_epsilon(&epsilon)?;
        Ok(ParamPop { epsilon, variant })
    }

    pub fn epsilon(&self) -> &BigScalar {
        &self.epsilon
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    fn at_prec(&self, prec: u32) -> ParamPop {
        ParamPop {
            epsilon: self.epsilon.with_prec(prec),
            variant: self.variant,
        }
    }
}

fn check_epsilon(eps: &BigScalar) -> Result<(), RelaxationError> {
    if eps.is_finite() && eps.signum_i() >= 0 && *eps <= BigScalar::one(eps.prec()) {
        Ok(())
    } else {
        Err(RelaxationError::EpsilonOutOfRange(eps.to_sci(12)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pop {
    pub num_vars: usize,
    pub objective: BiPoly<BigScalar>,
    pub inequalities: Vec<BiPoly<BigScalar>>,
    pub equalities: Vec<BiPoly<BigScalar>>,
    pub prec: u32,
}

impl Pop {
    fn max_half_degree(&self) -> usize {
        self.inequalities
            .iter()
            .chain(&self.equalities)
            .chain(std::iter::once(&self.objective))
            .map(|g| (g.total_degree().max(0) as usize).div_ceil(2))
            .max()
            .unwrap_or(0)
    }
}

/// `x + (1−ε)x²` as a polynomial in the first variable.
pub fn g_eps(eps: &BigScalar) -> BiPoly<BigScalar> {
    let one = BigScalar::one(eps.prec());
    BiPoly::from_terms([((1, 0), one.clone()), ((2, 0), one - eps)])
}

pub fn make_pop(p: &ParamPop) -> Result<Pop, RelaxationError> {
    check_epsilon(&p.epsilon)?;
    let prec = p.epsilon.prec();
    let one = BigScalar::one(prec);
    let eta = &one - &p.epsilon;
    Ok(match p.variant {
        Variant::Univariate4 => Pop {
            num_vars: 1,
            objective: BiPoly::var(0, &one),
            inequalities: vec![
                BiPoly::from_terms([((0, 0), one.clone()), ((2, 0), -one.clone())]),
                g_eps(&p.epsilon),
            ],
            equalities: Vec::new(),
            prec,
        },
        Variant::Bivariate3 => Pop {
            num_vars: 2,
            objective: BiPoly::var(0, &one),
            inequalities: vec![BiPoly::from_terms([
                ((0, 0), eta.clone()),
                ((1, 0), one.clone()),
                ((0, 2), -eta),
            ])],
            equalities: vec![BiPoly::from_terms([
                ((2, 0), one.clone()),
                ((0, 2), one.clone()),
                ((0, 0), -one),
            ])],
            prec,
        },
    })
}

/// Exact value of the problem: 0 for ε > 0 and −1 at ε = 0.
pub fn true_value(eps: &BigScalar) -> Result<BigScalar, RelaxationError> {
    check_epsilon(eps)?;
    Ok(if eps.is_zero() {
        BigScalar::from_i64(-1, eps.prec())
    } else {
        BigScalar::zero(eps.prec())
    })
}

/// Monomials of total degree at most `max_deg`, graded lexicographic with
/// `x1 > x2`.
pub fn monomials(num_vars: usize, max_deg: usize) -> Vec<Exponent> {
    let mut out = Vec::new();
    for deg in 0..=max_deg as u32 {
        if num_vars == 1 {
            out.push((deg, 0));
        } else {
            for a in (0..=deg).rev() {
                out.push((a, deg - a));
            }
        }
    }
    out
}

fn grlex_key(e: &Exponent) -> (u32, u32) {
    (e.0 + e.1, e.0)
}

fn leading_exponent(p: &BiPoly<BigScalar>) -> Option<Exponent> {
    p.terms().map(|(e, _)| *e).max_by_key(grlex_key)
}

/// Monomials up to `deg` not divisible by the leading monomial of any
/// equality. Restricting blocks to this basis keeps them equivalent to the
/// full blocks (the equalities relate the missing rows to the kept ones)
/// while removing the built-in rank deficiency.
fn block_basis(pop: &Pop, deg: usize) -> Vec<Exponent> {
    let leads: Vec<Exponent> = pop.equalities.iter().filter_map(leading_exponent).collect();
    monomials(pop.num_vars, deg)
        .into_iter()
        .filter(|&(a, b)| !leads.iter().any(|&(la, lb)| a >= la && b >= lb))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Basis {
    #[default]
    Power,
    /// Chebyshev polynomials, applied to the univariate blocks as a congruence.
    Chebyshev,
}

#[derive(Clone, Debug)]
pub struct MomentRelaxation {
    pub order: usize,
    pub pop: Pop,
    pub sdp: SdpProblem,
    pub moment_index: BTreeMap<Exponent, usize>,
    /// Row monomials of each block (moment matrix first, then localizers).
    pub block_bases: Vec<Vec<Exponent>>,
}

impl MomentRelaxation {
    pub fn to_json(&self) -> Value {
        let mut doc = crate::sdp::to_json(&self.sdp);
        doc["order"] = json!(self.order);
        doc["moment_index"] = json!(self
            .moment_index
            .iter()
            .map(|(e, v)| json!([e.0, e.1, v]))
            .collect::<Vec<_>>());
        doc
    }

    /// Moment of `x1^a x2^b` in a solution vector.
    pub fn moment<'a>(&self, y: &'a [BigScalar], e: Exponent) -> Option<&'a BigScalar> {
        self.moment_index.get(&e).map(|&i| &y[i])
    }
}

fn check_order(pop: &Pop, d: usize) -> Result<(), RelaxationError> {
    if d == 0 {
        return Err(RelaxationError::OrderTooLow);
    }
    let need = pop.max_half_degree();
    if d < need {
        return Err(RelaxationError::OrderBelowDegree {
            order: d,
            degree: 2 * need,
        });
    }
    Ok(())
}

pub fn build_moment(pop: &Pop, d: usize) -> Result<MomentRelaxation, RelaxationError> {
    build_moment_with_basis(pop, d, Basis::Power)
}

pub fn build_moment_with_basis(
    pop: &Pop,
    d: usize,
    basis: Basis,
) -> Result<MomentRelaxation, RelaxationError> {
    check_order(pop, d)?;
    if basis == Basis::Chebyshev && pop.num_vars != 1 {
        return Err(RelaxationError::Unsupported(
            "Chebyshev congruence is only available in one variable".into(),
        ));
    }
    let prec = pop.prec;
    let all = monomials(pop.num_vars, 2 * d);
    let moment_index: BTreeMap<Exponent, usize> =
        all.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut sdp = SdpProblem::new(all.len(), prec);
    for (e, c) in pop.objective.terms() {
        sdp.objective[moment_index[e]] += c;
    }
    let one = BigScalar::one(prec);
    let unit = BiPoly::constant(one.clone());
    let mut block_bases = Vec::new();
    let mut localizers: Vec<(&BiPoly<BigScalar>, usize)> = vec![(&unit, d)];
    for g in &pop.inequalities {
        let dg = (g.total_degree().max(0) as usize).div_ceil(2);
        localizers.push((g, d - dg));
    }
    for (g, k) in localizers {
        let rows = block_basis(pop, k);
        let mut blk = AffineBlock::new(rows.len(), prec);
        for i in 0..rows.len() {
            for j in i..rows.len() {
                for (&(ga, gb), c) in g.terms() {
                    let e = (rows[i].0 + rows[j].0 + ga, rows[i].1 + rows[j].1 + gb);
                    let v = moment_index[&e];
                    blk.add_coeff(v, i, j, c);
                }
            }
        }
        if basis == Basis::Chebyshev {
            let t = chebyshev_power_matrix(k, &one);
            blk = blk.congruence(&Matrix::from_rows(t));
        }
        sdp.blocks.push(blk);
        block_bases.push(rows);
    }
    sdp.equalities.push(LinearEquality {
        coeffs: vec![(moment_index[&(0, 0)], one.clone())],
        rhs: one.clone(),
    });
    for h in &pop.equalities {
        let dh = h.total_degree().max(0) as usize;
        for gamma in monomials(pop.num_vars, 2 * d - dh) {
            let coeffs: Vec<(usize, BigScalar)> = h
                .terms()
                .map(|(&(a, b), c)| (moment_index[&(a + gamma.0, b + gamma.1)], c.clone()))
                .collect();
            sdp.equalities.push(LinearEquality {
                coeffs,
                rhs: BigScalar::zero(prec),
            });
        }
    }
    Ok(MomentRelaxation {
        order: d,
        pop: pop.clone(),
        sdp,
        moment_index,
        block_bases,
    })
}

/// Dual SOS program `max v s.t. f − v = Σ σ_j g_j + Σ τ_k h_k`, posed as
/// minimization of `−v`.
#[derive(Clone, Debug)]
pub struct SosRelaxation {
    pub order: usize,
    pub sdp: SdpProblem,
    pub system: SosSystem,
    pub v_index: usize,
}

impl SosRelaxation {
    pub fn gram_matrix(&self, k: usize, y: &[BigScalar]) -> Matrix<BigScalar> {
        self.system.gram(k).matrix(y)
    }

    pub fn gram_layout(&self, k: usize) -> &GramVars {
        self.system.gram(k)
    }
}

pub fn build_sos(pop: &Pop, d: usize) -> Result<SosRelaxation, RelaxationError> {
    check_order(pop, d)?;
    let prec = pop.prec;
    let one = BigScalar::one(prec);
    let mut sys = SosSystem::new(pop.objective.clone(), prec);
    sys.add_gram(block_basis(pop, d), BiPoly::constant(one.clone()));
    for g in &pop.inequalities {
        let dg = (g.total_degree().max(0) as usize).div_ceil(2);
        sys.add_gram(block_basis(pop, d - dg), g.clone());
    }
    for h in &pop.equalities {
        let dh = h.total_degree().max(0) as usize;
        for gamma in monomials(pop.num_vars, 2 * d - dh) {
            sys.add_free(h.shift(gamma));
        }
    }
    let v_index = sys.add_free(BiPoly::constant(one.clone()));
    let mut sdp = sys.to_problem();
    sdp.objective[v_index] = -one;
    Ok(SosRelaxation {
        order: d,
        sdp,
        system: sys,
        v_index,
    })
}

fn require_optimal(sol: SdpSolution) -> Result<SdpSolution, RelaxationError> {
    if sol.status == SdpStatus::Optimal {
        Ok(sol)
    } else {
        Err(RelaxationError::NotSolved(format!(
            "{} ({}); try a higher precision",
            sol.status, sol.diagnostics
        )))
    }
}

/// Solves the order-`d` moment relaxation and returns the full solution.
pub fn solve_moment(
    p: &ParamPop,
    d: usize,
    params: &SolverParams,
) -> Result<(MomentRelaxation, SdpSolution), RelaxationError> {
    let pop = make_pop(&p.at_prec(params.precision))?;
    let relax = build_moment(&pop, d)?;
    let sol = require_optimal(sdp_solve(&relax.sdp, params)?)?;
    Ok((relax, sol))
}

/// Value `v_d(ε)` of the order-`d` moment relaxation.
pub fn solve_order(p: &ParamPop, d: usize, params: &SolverParams) -> Result<BigScalar, RelaxationError> {
    solve_moment(p, d, params).map(|(_, sol)| sol.primal_obj)
}

/// Solves the dual SOS program; the value is `−primal_obj`.
pub fn solve_sos(
    p: &ParamPop,
    d: usize,
    params: &SolverParams,
) -> Result<(SosRelaxation, SdpSolution), RelaxationError> {
    let pop = make_pop(&p.at_prec(params.precision))?;
    let relax = build_sos(&pop, d)?;
    let sol = require_optimal(sdp_solve(&relax.sdp, params)?)?;
    Ok((relax, sol))
}

/// Support values `max u₁y₁₀ + u₂y₀₁` of the order-`d` relaxation of the
/// bivariate problem, one per direction. Each value is the dual bound, so the
/// half-planes contain the projected relaxation.
pub fn project2d(
    p: &ParamPop,
    d: usize,
    directions: &[(BigScalar, BigScalar)],
    params: &SolverParams,
) -> Result<Vec<BigScalar>, RelaxationError> {
    if p.variant != Variant::Bivariate3 {
        return Err(RelaxationError::Unsupported(
            "projections are defined for the bivariate problem".into(),
        ));
    }
    let pop = make_pop(&p.at_prec(params.precision))?;
    let mut relax = build_moment(&pop, d)?;
    let i10 = relax.moment_index[&(1, 0)];
    let i01 = relax.moment_index[&(0, 1)];
    let mut out = Vec::with_capacity(directions.len());
    for (u1, u2) in directions {
        if u1.is_zero() && u2.is_zero() {
            return Err(RelaxationError::Unsupported("zero direction".into()));
        }
        let prec = params.precision;
        for c in relax.sdp.objective.iter_mut() {
            *c = BigScalar::zero(prec);
        }
        relax.sdp.objective[i10] = -u1.with_prec(prec);
        relax.sdp.objective[i01] = -u2.with_prec(prec);
        let sol = require_optimal(sdp_solve(&relax.sdp, params)?)?;
        out.push(-sol.dual_obj);
    }
    Ok(out)
}

/// `n` unit directions at angles `2πk/n`.
pub fn even_directions(n: usize, prec: u32) -> Vec<(BigScalar, BigScalar)> {
    let two_pi = BigScalar::pi(prec).mul_i64(2);
    (0..n)
        .map(|k| {
            let t = two_pi.mul_i64(k as i64).div_i64(n as i64);
            (t.cos(), t.sin())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 256;

    fn eps(num: i64, den: i64) -> BigScalar {
        BigScalar::ratio(num, den, P)
    }

    fn close(a: &BigScalar, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() <= tol
    }

    #[test]
    fn pop_shapes() {
        let p = make_pop(&ParamPop::new(eps(0, 1), Variant::Univariate4).unwrap()).unwrap();
        assert_eq!(p.inequalities[1].coeff((2, 0)).unwrap().to_f64(), 1.0);
        let p = make_pop(&ParamPop::new(eps(1, 1), Variant::Univariate4).unwrap()).unwrap();
        assert!(p.inequalities[1].coeff((2, 0)).is_none());
        let p = make_pop(&ParamPop::new(eps(1, 2), Variant::Bivariate3).unwrap()).unwrap();
        assert_eq!(p.inequalities[0].coeff((0, 0)).unwrap().to_f64(), 0.5);
        assert_eq!(p.inequalities[0].coeff((0, 2)).unwrap().to_f64(), -0.5);
        assert!(ParamPop::new(eps(3, 2), Variant::Univariate4).is_err());
        assert!(ParamPop::new(eps(-1, 2), Variant::Univariate4).is_err());
    }

    #[test]
    fn first_order_blocks() {
        let pop = make_pop(&ParamPop::new(eps(1, 10), Variant::Univariate4).unwrap()).unwrap();
        let r = build_moment(&pop, 1).unwrap();
        let dims: Vec<usize> = r.sdp.blocks.iter().map(AffineBlock::dim).collect();
        assert_eq!(dims, vec![2, 1, 1]);
        // [[y0, y1], [y1, y2]] with y0 pinned
        let m = &r.sdp.blocks[0];
        assert_eq!(m.coefficient(1).unwrap()[(0, 1)].to_f64(), 1.0);
        assert_eq!(m.coefficient(2).unwrap()[(1, 1)].to_f64(), 1.0);
        let g = &r.sdp.blocks[2];
        assert_eq!(g.coefficient(2).unwrap()[(0, 0)].to_f64(), 0.9);
    }

    #[test]
    fn second_order_localizer_entries() {
        let pop = make_pop(&ParamPop::new(eps(1, 4), Variant::Univariate4).unwrap()).unwrap();
        let r = build_moment(&pop, 2).unwrap();
        let g = &r.sdp.blocks[1];
        // (0,1) entry of M_1(g y) is y1 - y3
        assert_eq!(g.coefficient(1).unwrap()[(0, 1)].to_f64(), 1.0);
        assert_eq!(g.coefficient(3).unwrap()[(0, 1)].to_f64(), -1.0);
        let ge = &r.sdp.blocks[2];
        // (1,1) entry of M_1(g_ε y) is y3 + (1-ε) y4
        assert_eq!(ge.coefficient(3).unwrap()[(1, 1)].to_f64(), 1.0);
        assert_eq!(ge.coefficient(4).unwrap()[(1, 1)].to_f64(), 0.75);
        assert_eq!(r.sdp.blocks[0].dim(), 3);
    }

    #[test]
    fn first_order_value_and_sos_dual() {
        let params = SolverParams::default();
        let p = ParamPop::new(eps(3, 10), Variant::Univariate4).unwrap();
        let v = solve_order(&p, 1, &params).unwrap();
        assert!(close(&v, -0.7, 1e-20));
        let (relax, sol) = solve_sos(&p, 1, &params).unwrap();
        assert_eq!(relax.sdp.equalities.len(), 3);
        assert!(close(&-sol.primal_obj, -0.7, 1e-20));
    }

    #[test]
    fn zero_epsilon_value_is_minus_one() {
        let p = ParamPop::new(eps(0, 1), Variant::Univariate4).unwrap();
        let v = solve_order(&p, 2, &SolverParams::default()).unwrap();
        assert!(close(&v, -1.0, 1e-20));
    }

    #[test]
    fn chebyshev_basis_gives_same_value() {
        let params = SolverParams::default();
        let pop = make_pop(&ParamPop::new(eps(1, 10), Variant::Univariate4).unwrap()).unwrap();
        let a = sdp_solve(&build_moment(&pop, 2).unwrap().sdp, &params).unwrap();
        let b = sdp_solve(
            &build_moment_with_basis(&pop, 2, Basis::Chebyshev).unwrap().sdp,
            &params,
        )
        .unwrap();
        assert!((a.primal_obj - b.primal_obj).abs() < BigScalar::from_f64(1e-20, P));
    }

    #[test]
    fn bivariate_blocks_skip_leading_monomial() {
        let pop = make_pop(&ParamPop::new(eps(1, 10), Variant::Bivariate3).unwrap()).unwrap();
        let r = build_moment(&pop, 2).unwrap();
        // standard monomials of degree ≤ 2 modulo x1²: 1, x1, x2, x1x2, x2²
        assert_eq!(r.block_bases[0], vec![(0, 0), (1, 0), (0, 1), (1, 1), (0, 2)]);
        assert_eq!(r.sdp.blocks[1].dim(), 3);
        assert!(r.to_json()["moment_index"].as_array().unwrap().len() == 15);
    }

    #[test]
    fn order_zero_rejected() {
        let pop = make_pop(&ParamPop::new(eps(1, 10), Variant::Univariate4).unwrap()).unwrap();
        assert!(matches!(build_moment(&pop, 0), Err(RelaxationError::OrderTooLow)));
    }
}
