use crate::error::CertError;
use crate::poly::UniPoly;
use crate::scalar::{BigScalar, Rational, Scalar};

use super::g_eps;

const MAX_ORDER: usize = 100_000;
/// Root isolation stops at intervals of width `2^-ISOLATION_BITS`.
const ISOLATION_BITS: u32 = 64;

/// Smallest `d ≥ 0` with `ε(1+a)^{2d} ≥ 1` and, for `a > 1`,
/// `(a−1)^{2d}(2−ε) ≤ 1`, together with `s = (ax − 1)^{2d}`.
pub fn paulynomial<T: Scalar>(eps: &T, a: &T) -> Result<(usize, UniPoly<T>), CertError> {
    let one = eps.one_like();
    let zero = eps.zero_like();
    if !(*eps > zero && *eps <= one) {
        return Err(CertError::InvalidInput(format!(
            "epsilon must lie in (0,1], got {}",
            eps.to_exact_string()
        )));
    }
    if !(*a >= one && *a < one.from_i64_like(2)) {
        return Err(CertError::InvalidInput(format!(
            "a must lie in [1,2), got {}",
            a.to_exact_string()
        )));
    }
    let up = (one.clone() + a) * &(one.clone() + a);
    let am1 = a.clone() - &one;
    let down = am1.clone() * &am1;
    let two_minus = one.from_i64_like(2) - eps;
    let mut left = eps.clone();
    let mut right = two_minus;
    for d in 0..=MAX_ORDER {
        if left >= one && (am1.is_zero() || right <= one) {
            let lin = UniPoly::new(vec![-one.clone(), a.clone()]);
            return Ok((d, lin.pow(2 * d as u32)));
        }
        left = left * &up;
        right = right * &down;
    }
    Err(CertError::InvalidInput("no order below the search limit".into()))
}

#[derive(Clone, Debug, PartialEq)]
pub enum IneqResult {
    /// `min p ≥ −feas_tol` on `[−1,1]`; `margin` is the minimum found.
    Holds { margin: BigScalar },
    /// `p(witness) = value < −feas_tol`.
    Fails { witness: BigScalar, value: BigScalar },
}

impl IneqResult {
    pub fn holds(&self) -> bool {
        matches!(self, IneqResult::Holds { .. })
    }
}

fn to_rational(x: &BigScalar) -> Result<Rational, CertError> {
    x.to_rational()
        .ok_or_else(|| CertError::InvalidInput(format!("non-finite value {}", x.to_sci(6))))
}

fn sign_changes(chain: &[UniPoly<Rational>], x: &Rational) -> usize {
    let mut count = 0;
    let mut last = 0;
    for f in chain {
        let s = f.eval(x).cmp0() as i32;
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

fn sturm_chain(f: &UniPoly<Rational>) -> Vec<UniPoly<Rational>> {
    let mut chain = vec![f.clone(), f.derivative()];
    while !chain.last().unwrap().is_zero() && chain.last().unwrap().degree() > 0 {
        let n = chain.len();
        let (_, r) = chain[n - 2].div_rem(&chain[n - 1]);
        chain.push(-&r);
    }
    if chain.last().unwrap().is_zero() {
        chain.pop();
    }
    chain
}

/// Approximations (within `2^-ISOLATION_BITS`) of the distinct real roots of
/// `f` in `[lo, hi]`.
fn isolate_roots(f: &UniPoly<Rational>, lo: &Rational, hi: &Rational) -> Vec<Rational> {
    if f.degree() <= 0 {
        return Vec::new();
    }
    let chain = sturm_chain(f);
    let width = Rational::from((1, 1)) >> ISOLATION_BITS;
    let mut out = Vec::new();
    // Endpoints that are roots are reported directly and nudged away from.
    let nudge = |x: &Rational, dir: i32, out: &mut Vec<Rational>| -> Rational {
        let mut x = x.clone();
        let mut step = width.clone();
        while f.eval(&x).cmp0() == std::cmp::Ordering::Equal {
            out.push(x.clone());
            x += if dir > 0 { step.clone() } else { -step.clone() };
            step >>= 1;
        }
        x
    };
    let a = nudge(lo, -1, &mut out);
    let b = nudge(hi, 1, &mut out);
    let mut stack = vec![(a.clone(), b.clone(), sign_changes(&chain, &a), sign_changes(&chain, &b))];
    while let Some((a, b, va, vb)) = stack.pop() {
        let n = va.saturating_sub(vb);
        if n == 0 {
            continue;
        }
        let w = Rational::from(&b - &a);
        if w <= width {
            out.push(Rational::from(&a + &b) / 2u32);
            continue;
        }
        let mut m = Rational::from(&a + &b) / 2u32;
        if f.eval(&m).cmp0() == std::cmp::Ordering::Equal {
            out.push(m.clone());
            m += w / 7u32;
        }
        let vm = sign_changes(&chain, &m);
        stack.push((a, m.clone(), va, vm));
        stack.push((m, b, vm, vb));
    }
    out
}

/// Checks `p(x) = x − s(x)(x + (1−ε)x²) ≥ −feas_tol` on `[−1,1]`. `p` is
/// evaluated exactly (inputs are read as the exact binary values they hold)
/// at `samples` Chebyshev nodes, at both endpoints and at isolated critical
/// points of `p`, so the minimum over these candidates matches the true
/// minimum up to the isolation width squared.
pub fn verify_ineq(
    s: &UniPoly<BigScalar>,
    eps: &BigScalar,
    samples: usize,
    feas_tol: &BigScalar,
) -> Result<IneqResult, CertError> {
    let need = 2 * (s.degree().max(0) as usize + 2);
    if samples < need {
        return Err(CertError::InvalidInput(format!(
            "need at least {need} samples, got {samples}"
        )));
    }
    let prec = eps.prec();
    let sr: UniPoly<Rational> = UniPoly::new(
        s.coeffs()
            .iter()
            .map(to_rational)
            .collect::<Result<Vec<_>, _>>()?,
    );
    let er = to_rational(eps)?;
    let one = Rational::from(1);
    let p = &UniPoly::x(&one) - &(&sr * &g_eps(&er));

    let mut candidates = vec![Rational::from(-1), Rational::from(1)];
    let pi = BigScalar::pi(128);
    for k in 0..samples {
        let t = pi.mul_i64(2 * k as i64 + 1).div_i64(2 * samples as i64);
        candidates.push(to_rational(&t.cos())?);
    }
    let lo = Rational::from(-1);
    let hi = Rational::from(1);
    for x in isolate_roots(&p.derivative(), &lo, &hi) {
        if x >= lo && x <= hi {
            candidates.push(x);
        }
    }
    let (x_min, p_min) = candidates
        .into_iter()
        .map(|x| {
            let v = p.eval(&x);
            (x, v)
        })
        .min_by(|a, b| a.1.cmp(&b.1))
        .expect("candidates are never empty");
    let value = BigScalar::from_rational(&p_min, prec);
    if value < -feas_tol.clone() {
        Ok(IneqResult::Fails {
            witness: BigScalar::from_rational(&x_min, prec),
            value,
        })
    } else {
        Ok(IneqResult::Holds { margin: value })
    }
}
