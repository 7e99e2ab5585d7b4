use crate::bipoly::BiPoly;
use crate::error::CertError;
use crate::gram::{univariate_basis, SosSystem};
use crate::linalg::Matrix;
use crate::poly::UniPoly;
use crate::relaxation::SosRelaxation;
use crate::scalar::{simplest_rational_within, BigScalar, Rational, Scalar};
use crate::sdp::{sdp_max_margin, SdpSolution, SdpStatus, SolverParams};

use super::{
    g_eps, one_minus_x2, verify_certificate, GramCertificate, ReducedDecomposition, SosDecomposition, MIN_EIG_TOL,
    RESIDUAL_TOL,
};

fn big(v: f64, prec: u32) -> BigScalar {
    BigScalar::from_f64(v, prec)
}

/// Polynomial square root when `s` is (numerically) a perfect square.
fn poly_sqrt(s: &UniPoly<BigScalar>) -> Option<UniPoly<BigScalar>> {
    let deg = s.degree();
    if deg < 0 || deg % 2 == 1 {
        return None;
    }
    let lead = s.leading()?.clone();
    if lead.signum_i() <= 0 {
        return None;
    }
    let n = (deg / 2) as usize;
    let c = s.coeffs();
    let prec = lead.prec();
    let mut p = vec![BigScalar::zero(prec); n + 1];
    p[n] = lead.sqrt();
    let two_lead = p[n].mul_i64(2);
    for j in 1..=n {
        let mut acc = c[2 * n - j].clone();
        for i in 1..j {
            acc -= &(p[n - i].clone() * &p[n - j + i]);
        }
        p[n - j] = acc / &two_lead;
    }
    let p = UniPoly::new(p);
    let scale = s.max_abs_coeff()?;
    let err = (s - &(&p * &p)).max_abs_coeff().unwrap_or_else(|| BigScalar::zero(prec));
    (err <= scale * BigScalar::pow2(32 - prec as i32, prec)).then_some(p)
}

/// Outcome of a max-margin Gram solve: one Gram per basis, in order.
fn solve_grams(
    target: &UniPoly<BigScalar>,
    parts: &[(usize, UniPoly<BigScalar>)],
    params: &SolverParams,
) -> Result<Vec<GramCertificate<BigScalar>>, CertError> {
    let prec = params.precision;
    let mut sys = SosSystem::new(BiPoly::from_x1(target), prec);
    for (dim, mult) in parts {
        let basis = if *dim == 0 { Vec::new() } else { univariate_basis(dim - 1) };
        sys.add_gram(basis, BiPoly::from_x1(mult));
    }
    let problem = sys.to_problem();
    if problem.blocks.is_empty() {
        return Err(CertError::InvalidInput("no Gram blocks to solve for".into()));
    }
    let mm = sdp_max_margin(&problem, params)?;
    let feas_tol = params.feas_tol_big();
    if mm.status == SdpStatus::PrimalInfeasible {
        return Err(CertError::Infeasible(format!(
            "coefficient system has no solution ({})",
            mm.diagnostics
        )));
    }
    if let Some(u) = &mm.upper {
        if *u <= -feas_tol {
            return Err(CertError::Infeasible(format!(
                "optimal Gram margin is at most {}",
                u.to_sci(6)
            )));
        }
    }
    if mm.margin < big(MIN_EIG_TOL, prec) {
        return Err(CertError::Undecided(format!(
            "best Gram margin {} ({}, {})",
            mm.margin.to_sci(6),
            mm.status,
            mm.diagnostics
        )));
    }
    Ok((0..parts.len())
        .map(|k| GramCertificate::new(sys.gram(k).matrix(&mm.y)))
        .collect())
}

/// A Gram matrix of dimension `dim` for the SOS polynomial `s`: exact
/// `c cᵀ` when `s` is a perfect square, otherwise a max-margin SDP solution.
pub fn sos_gram(
    s: &UniPoly<BigScalar>,
    dim: usize,
    params: &SolverParams,
) -> Result<GramCertificate<BigScalar>, CertError> {
    let prec = params.precision;
    let like = BigScalar::zero(prec);
    if s.degree() > 2 * dim as isize - 2 {
        return Err(CertError::InvalidInput(format!(
            "degree {} does not fit a Gram basis of size {dim}",
            s.degree()
        )));
    }
    if s.is_zero() {
        return Ok(GramCertificate::zeros(dim, &like));
    }
    let s = s.map(|c| c.with_prec(prec));
    if let Some(p) = poly_sqrt(&s) {
        return Ok(GramCertificate::square_of(&p, dim, &like));
    }
    let mut grams = solve_grams(&s, &[(dim, UniPoly::constant(BigScalar::one(prec)))], params)?;
    Ok(grams.remove(0))
}

/// Completes `s` to a certificate with `v = 0` at order `d`.
pub fn complete_certificate(
    s: &UniPoly<BigScalar>,
    eps: &BigScalar,
    d: usize,
    params: &SolverParams,
) -> Result<SosDecomposition<BigScalar>, CertError> {
    complete_certificate_with_value(s, eps, d, &BigScalar::zero(params.precision), params)
}

pub fn complete_certificate_with_value(
    s: &UniPoly<BigScalar>,
    eps: &BigScalar,
    d: usize,
    v: &BigScalar,
    params: &SolverParams,
) -> Result<SosDecomposition<BigScalar>, CertError> {
    if d == 0 {
        return Err(CertError::InvalidInput("order must be at least 1".into()));
    }
    let gram = sos_gram(s, d, params)?;
    complete_certificate_with_gram(&gram, eps, d, v, params)
}

/// Finds `q`, `r` for a given Gram of `s`. With `v = 0` the reduced form is
/// solved (the full form has no interior there, as `q` and `r` are forced
/// to vanish at 0).
pub fn complete_certificate_with_gram(
    s: &GramCertificate<BigScalar>,
    eps: &BigScalar,
    d: usize,
    v: &BigScalar,
    params: &SolverParams,
) -> Result<SosDecomposition<BigScalar>, CertError> {
    let prec = params.precision;
    if d == 0 || s.dim() > d {
        return Err(CertError::InvalidInput(format!(
            "s has a basis of size {} but order {d} allows at most {d}",
            s.dim()
        )));
    }
    let one = BigScalar::one(prec);
    let eps = eps.with_prec(prec);
    let v = v.with_prec(prec);
    let s = s.map(|c| c.with_prec(prec));
    let s = pad(&s, d, &one);
    let sp = s.to_poly();
    let target = &UniPoly::new(vec![-v.clone(), one.clone()]) - &(&sp * &g_eps(&eps));
    let cert = if v.is_zero() {
        let s0 = sp.coeff(0).cloned().unwrap_or_else(|| BigScalar::zero(prec));
        if (s0 - &one).abs() > big(RESIDUAL_TOL, prec) {
            return Err(CertError::Infeasible("a certificate with v = 0 needs s(0) = 1".into()));
        }
        let reduced = UniPoly::new(target.coeffs().iter().skip(2).cloned().collect());
        let grams = solve_grams(
            &reduced,
            &[(d, UniPoly::constant(one.clone())), (d - 1, one_minus_x2(&one))],
            params,
        )?;
        let mut it = grams.into_iter();
        ReducedDecomposition {
            epsilon: eps,
            q_tilde: it.next().unwrap(),
            r_tilde: it.next().unwrap(),
            s,
        }
        .to_full()
    } else {
        let grams = solve_grams(
            &target,
            &[(d + 1, UniPoly::constant(one.clone())), (d, one_minus_x2(&one))],
            params,
        )?;
        let mut it = grams.into_iter();
        SosDecomposition {
            epsilon: eps,
            v,
            q: it.next().unwrap(),
            r: it.next().unwrap(),
            s,
        }
    };
    check(cert)
}

fn pad(g: &GramCertificate<BigScalar>, dim: usize, like: &BigScalar) -> GramCertificate<BigScalar> {
    let mut m = Matrix::filled(dim, dim, like.zero_like());
    for i in 0..g.dim() {
        for j in 0..g.dim() {
            m[(i, j)] = g.gram()[(i, j)].clone();
        }
    }
    GramCertificate::new(m)
}

fn check(cert: SosDecomposition<BigScalar>) -> Result<SosDecomposition<BigScalar>, CertError> {
    let ver = verify_certificate(&cert);
    if ver.passes() {
        Ok(cert)
    } else {
        Err(CertError::VerificationFailed(format!(
            "residual {} and Gram eigenvalue bound {}",
            ver.residual.to_sci(6),
            ver.min_gram_eig.to_sci(6)
        )))
    }
}

/// Reads the Gram blocks of a solved univariate SOS relaxation and checks them.
pub fn extract_certificate(
    relax: &SosRelaxation,
    sol: &SdpSolution,
    eps: &BigScalar,
) -> Result<SosDecomposition<BigScalar>, CertError> {
    let grams: Vec<_> = relax.system.grams().collect();
    if grams.len() != 3 || grams.iter().any(|g| g.basis.iter().any(|e| e.1 != 0)) {
        return Err(CertError::InvalidInput(
            "expected the univariate relaxation with blocks q, r, s".into(),
        ));
    }
    if sol.status != SdpStatus::Optimal {
        return Err(CertError::InvalidInput(format!("solution status is {}", sol.status)));
    }
    let prec = sol.y.first().map_or(eps.prec(), BigScalar::prec);
    let cert = SosDecomposition {
        epsilon: eps.with_prec(prec),
        v: sol.y[relax.v_index].clone(),
        q: GramCertificate::new(relax.gram_matrix(0, &sol.y)),
        r: GramCertificate::new(relax.gram_matrix(1, &sol.y)),
        s: GramCertificate::new(relax.gram_matrix(2, &sol.y)),
    };
    check(cert)
}

fn round_to(x: &Rational, denom: &Rational) -> Rational {
    let scaled = Rational::from(x * denom);
    let (_, rounded) = scaled.fract_round(rug::Integer::new());
    Rational::from(rounded) / denom
}

/// Rounds the Grams of `r` and `s` to multiples of `1/denom_bound`, puts the
/// exact remainder of the identity into the Gram of `q` (even degrees on the
/// diagonal, odd degrees on the first off-diagonal) and accepts the result
/// only if all three Grams are PSD in exact arithmetic.
pub fn rationalize_certificate(
    c: &SosDecomposition<BigScalar>,
    denom_bound: u64,
) -> Result<SosDecomposition<Rational>, CertError> {
    if denom_bound == 0 {
        return Err(CertError::InvalidInput("denominator bound must be positive".into()));
    }
    let ver = verify_certificate(c);
    let d = Rational::from(denom_bound);
    let allowed = 1e-2 / (denom_bound as f64 * denom_bound as f64);
    if ver.residual.to_f64() > allowed {
        return Err(CertError::InvalidInput(format!(
            "residual {} is too large to round with denominators up to {denom_bound}",
            ver.residual.to_sci(6)
        )));
    }
    let exact = |x: &BigScalar| {
        x.to_rational()
            .ok_or_else(|| CertError::InvalidInput("non-finite certificate entry".into()))
    };
    let prec = c.epsilon.prec();
    let eps_x = exact(&c.epsilon)?;
    let eps_tol = Rational::from(eps_x.clone().abs()) >> (prec - 8);
    let epsilon = simplest_rational_within(&eps_x, &eps_tol);
    let v = simplest_rational_within(&exact(&c.v)?, &(Rational::from(1) >> 66u32));
    let round_gram = |g: &GramCertificate<BigScalar>| -> Result<GramCertificate<Rational>, CertError> {
        let rows = g
            .gram()
            .to_rows()
            .iter()
            .map(|row| row.iter().map(|x| exact(x).map(|q| round_to(&q, &d))).collect())
            .collect::<Result<Vec<Vec<Rational>>, _>>()?;
        Ok(GramCertificate::new(Matrix::from_rows(rows)))
    };
    let r = round_gram(&c.r)?;
    let s = round_gram(&c.s)?;
    let mut q = round_gram(&c.q)?;
    let one = Rational::from(1);
    let target = &(&UniPoly::new(vec![-v.clone(), one.clone()]) - &(&r.to_poly() * &one_minus_x2(&one)))
        - &(&s.to_poly() * &g_eps(&epsilon));
    let gap = &target - &q.to_poly();
    let n = q.dim();
    if gap.degree() > 2 * n as isize - 2 {
        return Err(CertError::RoundingFailed(
            "identity remainder exceeds the degree of q".into(),
        ));
    }
    let g = q.gram_mut();
    for (k, delta) in gap.coeffs().iter().enumerate() {
        if delta.is_zero() {
            continue;
        }
        if k % 2 == 0 {
            g[(k / 2, k / 2)] += delta;
        } else {
            let half = Rational::from(delta / 2u32);
            g[(k / 2, k / 2 + 1)] += &half;
            g[(k / 2 + 1, k / 2)] += &half;
        }
    }
    let out = SosDecomposition { epsilon, v, q, r, s };
    let ver = verify_certificate(&out);
    if !ver.residual.is_zero() {
        return Err(CertError::RoundingFailed(format!(
            "exact residual {} after repair",
            ver.residual
        )));
    }
    for (name, g) in [("q", &out.q), ("r", &out.r), ("s", &out.s)] {
        if !crate::linalg::is_psd_exact(g.gram()) {
            return Err(CertError::RoundingFailed(format!(
                "Gram of {name} is not PSD after rounding"
            )));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::paulynomial;
    use crate::relaxation::{build_sos, make_pop, ParamPop, Variant};
    use crate::sdp::sdp_solve;

    const P: u32 = 256;

    fn params() -> SolverParams {
        SolverParams::default()
    }

    #[test]
    fn sqrt_of_perfect_square() {
        let p = UniPoly::new(vec![BigScalar::one(P), BigScalar::from_i64(-3, P)]);
        let s = &p * &p;
        let r = poly_sqrt(&s).unwrap();
        assert!((&(&r * &r) - &s).max_abs_f64() < 1e-60);
        let not = UniPoly::new(vec![BigScalar::one(P), BigScalar::zero(P), BigScalar::from_i64(2, P)]);
        assert!(poly_sqrt(&not).is_none());
    }

    #[test]
    fn first_order_at_zero_epsilon() {
        let s = UniPoly::constant(BigScalar::one(P));
        let c = complete_certificate_with_value(&s, &BigScalar::zero(P), 1, &BigScalar::from_i64(-1, P), &params())
            .unwrap();
        assert!(c.q.gram().max_abs().unwrap().to_f64() < 1e-20);
        assert!((c.r.gram()[(0, 0)].to_f64() - 1.0).abs() < 1e-20);
    }

    #[test]
    fn quartic_completes_at_third_order() {
        let eps = BigScalar::ratio(1, 16, P);
        let (_, s) = paulynomial(&eps, &BigScalar::one(P)).unwrap();
        let c = complete_certificate(&s, &eps, 3, &params()).unwrap();
        let ver = verify_certificate(&c);
        assert!(ver.residual.to_f64() <= 1e-20);
        // pointwise: x − q − r(1−x²) − s·g = 0
        let defect = c.defect();
        for k in 0..20 {
            let x = BigScalar::ratio(2 * k - 19, 19, P);
            assert!(defect.eval(&x).abs().to_f64() < 1e-20);
        }
    }

    #[test]
    fn v_zero_requires_s_at_zero_one() {
        let s = UniPoly::constant(BigScalar::from_i64(2, P));
        let e = complete_certificate(&s, &BigScalar::ratio(1, 2, P), 2, &params());
        assert!(matches!(e, Err(CertError::Infeasible(_))), "{e:?}");
    }

    #[test]
    fn extract_first_order() {
        for (num, den) in [(3, 10), (0, 1)] {
            let eps = BigScalar::ratio(num, den, P);
            let pop = make_pop(&ParamPop::new(eps.clone(), Variant::Univariate4).unwrap()).unwrap();
            let relax = build_sos(&pop, 1).unwrap();
            let sol = sdp_solve(&relax.sdp, &params()).unwrap();
            let c = extract_certificate(&relax, &sol, &eps).unwrap();
            let want = eps.to_f64() - 1.0;
            assert!((c.v.to_f64() - want).abs() < 1e-10);
        }
    }

    #[test]
    fn rationalize_exact_input_is_unchanged() {
        let one = BigScalar::one(P);
        let c = SosDecomposition {
            epsilon: BigScalar::zero(P),
            v: -one.clone(),
            q: GramCertificate::zeros(2, &one),
            r: GramCertificate::new(Matrix::from_rows(vec![vec![one.clone()]])),
            s: GramCertificate::new(Matrix::from_rows(vec![vec![one.clone()]])),
        };
        let r = rationalize_certificate(&c, 1).unwrap();
        assert_eq!(r.v, Rational::from(-1));
        assert_eq!(r.r.gram()[(0, 0)], Rational::from(1));
        assert!(r.q.gram().max_abs().unwrap().is_zero());
    }
}
