use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sos_staircase::certificates::{
    cert_from_json, cert_to_json, complete_certificate, complete_certificate_with_value, extract_certificate,
    goursat_transform, lift_to_bivariate, markov_bound, paulynomial, rationalize_certificate, verify_certificate,
    verify_ineq, GramCertificate, IneqResult, SosDecomposition,
};
use sos_staircase::error::CertError;
use sos_staircase::relaxation::{solve_sos, ParamPop, Variant};
use sos_staircase::scalar::parse_rational;
use sos_staircase::sdp::SolverParams;
use sos_staircase::staircase::{closed_form_eps2, theoretical_bounds};
use sos_staircase::{BigScalar, Matrix, Rational, Scalar, UniPoly};

const P: u32 = 256;

fn big(x: f64) -> BigScalar {
    BigScalar::from_f64(x, P)
}

fn one() -> BigScalar {
    BigScalar::one(P)
}

fn g_at(eps: &BigScalar, x: &BigScalar) -> BigScalar {
    x + &((one() - eps) * x * x)
}

fn extracted(eps: &BigScalar, d: usize) -> SosDecomposition<BigScalar> {
    let params = SolverParams::default();
    let (relax, sol) = solve_sos(&ParamPop::new(eps.clone(), Variant::Univariate4).unwrap(), d, &params).unwrap();
    extract_certificate(&relax, &sol, eps).unwrap()
}

#[test]
fn verify_ineq_examples() {
    let tol = big(1e-25);
    let (_, s) = paulynomial(&BigScalar::ratio(1, 16, P), &one()).unwrap();
    assert!(verify_ineq(&s, &BigScalar::ratio(1, 16, P), 16, &tol).unwrap().holds());
    for (s, want) in [(UniPoly::constant(one()), -0.5), (UniPoly::zero(), -1.0)] {
        match verify_ineq(&s, &big(0.5), 8, &tol).unwrap() {
            IneqResult::Fails { witness, value } => {
                assert_eq!(witness.to_f64(), -1.0);
                assert_eq!(value.to_f64(), want);
            }
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn paulynomial_endpoint_check_at_one_sixteenth() {
    let eps = BigScalar::ratio(1, 16, P);
    let (d, s) = paulynomial(&eps, &one()).unwrap();
    assert_eq!(d, 2);
    // f(−1) = ε(1+a)^{2d} − 1 = 0
    assert!((eps.clone() * &BigScalar::from_i64(2, P).powi(4) - &one()).is_zero());
    let p_at = |x: &BigScalar| x.clone() - &(s.eval(x) * &g_at(&eps, x));
    assert!(p_at(&-one()).is_zero());
}

#[test]
fn complete_first_order_at_zero() {
    let c = complete_certificate_with_value(&UniPoly::constant(one()), &big(0.0), 1, &big(-1.0), &SolverParams::default())
        .unwrap();
    assert!(c.q.gram().to_rows().iter().flatten().all(|x| x.abs() <= big(1e-20)));
    assert!((c.r.gram()[(0, 0)].clone() - &one()).abs() <= big(1e-20));
    assert!(verify_certificate(&c).passes());
}

#[test]
fn complete_quartic_at_one_sixteenth_with_spot_check() {
    let eps = BigScalar::ratio(1, 16, P);
    let (_, s) = paulynomial(&eps, &one()).unwrap();
    let c = complete_certificate(&s, &eps, 3, &SolverParams::default()).unwrap();
    let v = verify_certificate(&c);
    assert!(v.residual <= big(1e-20));
    assert!(v.min_gram_eig >= big(-1e-25));
    let (q, r, sp) = (c.q.to_poly(), c.r.to_poly(), c.s.to_poly());
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let x = big(rng.gen_range(-2.0..2.0));
        let rhs = q.eval(&x) + &(r.eval(&x) * &(one() - &(&x * &x))) + &(sp.eval(&x) * &g_at(&eps, &x));
        assert!((x.clone() - &c.v - &rhs).abs() <= big(1e-20));
    }
}

#[test]
fn complete_at_eps2_recovers_the_constant_multiplier() {
    let eps = closed_form_eps2(P);
    let r3 = BigScalar::from_i64(3, P).sqrt();
    let s = UniPoly::new(vec![one(), -r3.clone()]).pow(2);
    let c = complete_certificate(&s, &eps, 2, &SolverParams::default()).unwrap();
    // r = r̃·x², so r̃ sits in the x·x entry
    let rt = c.r.gram()[(1, 1)].clone();
    assert!((rt - &r3.mul_i64(3).div_i64(2)).abs() <= big(1e-20));
    assert!(verify_certificate(&c).passes());
}

#[test]
fn completion_rejects_a_failing_multiplier() {
    // s = 1 fails the inequality at ε = 1/2, so no q, r exist
    let r = complete_certificate(&UniPoly::constant(one()), &big(0.5), 2, &SolverParams::default());
    assert!(matches!(r, Err(CertError::Infeasible(_))), "{r:?}");
}

#[test]
fn extract_examples() {
    let c = extracted(&big(0.2), 2);
    assert!(c.v >= big(-1e-10));
    let c = extracted(&big(0.3), 1);
    assert!((c.v.clone() - &(big(0.3) - &one())).abs() <= big(1e-10));
    let c = extracted(&big(0.0), 1);
    assert!((c.v.clone() + &one()).abs() <= big(1e-10));
}

#[test]
fn extract_round_trip_over_the_grid() {
    let tol = big(10.0 * SolverParams::default().gap_tol);
    for k in 1..=4 {
        let eps = BigScalar::pow10(-k, P);
        for d in 1..=6 {
            let v = verify_certificate(&extracted(&eps, d));
            assert!(v.residual <= tol, "k={k} d={d}: {}", v.residual.to_sci(3));
            assert!(v.min_gram_eig >= big(-1e-25), "k={k} d={d}");
        }
    }
}

#[test]
fn lift_of_numeric_certificate() {
    let c = extracted(&big(0.2), 2);
    let res = verify_certificate(&c).residual;
    let lift = lift_to_bivariate(&c);
    assert!(lift.defect <= res.mul_i64(16) + &big(1e-60), "{}", lift.defect.to_sci(3));
}

fn rat_gram(v: i64) -> GramCertificate<Rational> {
    GramCertificate::new(Matrix::from_rows(vec![vec![Rational::from(v)]]))
}

#[test]
fn rationalize_examples() {
    let exact = SosDecomposition {
        epsilon: big(0.0),
        v: big(-1.0),
        q: GramCertificate::zeros(2, &big(0.0)),
        r: GramCertificate::new(Matrix::from_rows(vec![vec![one()]])),
        s: GramCertificate::new(Matrix::from_rows(vec![vec![one()]])),
    };
    let r = rationalize_certificate(&exact, 1).unwrap();
    assert_eq!(r.v, Rational::from(-1));
    assert_eq!(r.r, rat_gram(1));
    assert_eq!(r.s, rat_gram(1));
    assert!(r.q.gram().to_rows().iter().flatten().all(Scalar::is_zero));

    let quarter = rationalize_certificate(&extracted(&BigScalar::ratio(1, 4, P), 2), 1_000_000).unwrap();
    let v = verify_certificate(&quarter);
    assert!(v.residual.is_zero());
    assert_eq!(v.exact_psd, Some(true));
    assert_eq!(quarter.epsilon, Rational::from((1, 4)));

    let boundary = rationalize_certificate(&extracted(&closed_form_eps2(P), 2), 1_000_000);
    assert!(matches!(boundary, Err(CertError::RoundingFailed(_))), "{boundary:?}");
}

#[test]
fn json_round_trips() {
    let c = extracted(&big(0.2), 2);
    let doc = cert_to_json(&c);
    assert_eq!(doc["schema"], "cert-v1");
    assert_eq!(doc["metadata"]["order"], 2);
    let back = cert_from_json(&doc, |s| BigScalar::parse(s, P).map_err(|e| e.to_string())).unwrap();
    assert_eq!(back, c);
    let r = rationalize_certificate(&c, 1_000_000).unwrap();
    let back = cert_from_json(&cert_to_json(&r), |s| parse_rational(s).map_err(|e| e.to_string())).unwrap();
    assert_eq!(back, r);
}

#[test]
fn markov_first_order_matches_the_second_threshold_bound() {
    let (coeff, eval) = markov_bound(1, P);
    assert_eq!(eval, coeff.mul_i64(2) + &one());
    assert_eq!(theoretical_bounds(1, P).0, eval.recip());
    for d in 1..=8 {
        let (c, e) = markov_bound(d, P);
        assert_eq!(e, c.mul_i64(2 * d as i64) + &one());
    }
}

fn rational() -> impl Strategy<Value = Rational> {
    (-60i64..=60, 1i64..=12).prop_map(|(n, d)| Rational::from((n, d)))
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 50,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    /// The explicit multiplier passes the inequality, its order respects the
    /// upper bound `4^{-d}`, and it lies on the correct side of the hyperbola
    /// `1/(1+(1−ε)x)`.
    #[test]
    fn paulynomial_is_valid(log_eps in -8.0f64..=0.0) {
        let eps = BigScalar::from_f64(10f64.powf(log_eps), P);
        let (d, s) = paulynomial(&eps, &one()).unwrap();
        let tol = big(1e-25);
        let samples = 2 * (s.degree().max(0) as usize + 2);
        let r = verify_ineq(&s, &eps, samples, &tol).unwrap();
        prop_assert!(r.holds(), "{:?}", r);
        let floor = BigScalar::pow2(-2 * d as i32, P) * &(one() - &BigScalar::pow10(-30, P));
        prop_assert!(eps >= floor);
        prop_assert!((s.eval(&BigScalar::zero(P)) - &one()).abs() <= tol);
        let eta = one() - &eps;
        for j in 1..=20 {
            let x = BigScalar::ratio(j, 20, P);
            let hyp = (one() + &(&eta * &x)).recip();
            prop_assert!(s.eval(&x) <= &hyp + &tol, "above at {}", x.to_f64());
            let xn = -x;
            let hyp = (one() + &(&eta * &xn)).recip();
            prop_assert!(s.eval(&xn) >= hyp - &tol, "below at {}", xn.to_f64());
        }
    }

    #[test]
    fn perturbed_gram_shows_in_residual(i in 0usize..3, j in 0usize..3, dn in 1i64..1000) {
        let eps = Rational::from((1, 3));
        let mut c = SosDecomposition {
            v: eps.clone() - &Rational::from(1),
            q: GramCertificate::zeros(2, &eps),
            r: rat_gram(1).map(|x| x.clone() - &eps),
            s: rat_gram(1),
            epsilon: eps,
        };
        let delta = Rational::from((dn, 1000));
        let g = match i { 0 => c.q.gram_mut(), 1 => c.r.gram_mut(), _ => c.s.gram_mut() };
        let n = g.rows();
        let (a, b) = (j % n, (j / 2) % n);
        g[(a, b)] = g[(a, b)].clone() + &delta;
        if a != b {
            g[(b, a)] = g[(b, a)].clone() + &delta;
        }
        prop_assert!(verify_certificate(&c).residual >= delta / Rational::from(4));
    }

    #[test]
    fn goursat_matches_pointwise(
        coeffs in prop::collection::vec(rational(), 1..=9),
        x in rational(),
    ) {
        let m = coeffs.len().div_ceil(2).max(1);
        let t = UniPoly::new(coeffs);
        let g = goursat_transform(&t, m).unwrap();
        let x2 = x.clone() * &x;
        let den = Rational::from(1) + &x2;
        let clear = (0..2 * m).fold(Rational::from(1), |a, _| a * &den);
        let direct = t.eval(&((x2 - &Rational::from(1)) / &den)) * &clear;
        prop_assert_eq!(g.eval(&x), direct.clone());
        let gb = goursat_transform(&t.map(|c| BigScalar::from_rational(c, P)), m).unwrap()
            .eval(&BigScalar::from_rational(&x, P));
        let want = BigScalar::from_rational(&direct, P);
        let scale = want.abs().max(one());
        prop_assert!((gb - &want).abs() <= BigScalar::pow10(-(P as i32) / 4, P) * &scale);
    }

    /// `|s_k| ≤ (4e)^{2d}·max_j s(j/2d)` for sums of squares of degree `2d`.
    #[test]
    fn coefficient_bound_holds(
        d in 1usize..=6,
        seeds in prop::collection::vec(prop::collection::vec(-9i64..=9, 7), 1..=3),
    ) {
        let mut s: UniPoly<Rational> = UniPoly::zero();
        for p in &seeds {
            let p = UniPoly::new(p[..=d].iter().map(|&k| Rational::from(k)).collect());
            s = &s + &(&p * &p);
        }
        prop_assume!(!s.is_zero());
        let grid = (0..=2 * d)
            .map(|j| s.eval(&Rational::from((j as i64, 2 * d as i64))))
            .max()
            .unwrap();
        let cap = markov_bound(d, P).0 * BigScalar::from_rational(&grid, P);
        for c in s.coeffs() {
            prop_assert!(BigScalar::from_rational(&c.clone().abs(), P) <= cap);
        }
    }
}
