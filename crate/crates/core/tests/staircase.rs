use proptest::prelude::*;

use sos_staircase::certificates::verify_certificate;
use sos_staircase::error::StaircaseError;
use sos_staircase::relaxation::{solve_order, ParamPop, Variant};
use sos_staircase::sdp::{sdp_feasibility, Feasibility, SolverParams};
use sos_staircase::staircase::{
    closed_form_eps2, closed_form_eps3_upper, eps2_discriminant, eps3_sextic, epsilon_threshold,
    epsilon_threshold_with, exactness_feasible, farkas_witness, sweep, theoretical_bounds, EndpointStatus,
    ExactnessSystem, Width,
};
use sos_staircase::{BigScalar, Scalar};

const P: u32 = 256;

fn big(x: f64) -> BigScalar {
    BigScalar::from_f64(x, P)
}

fn params() -> SolverParams {
    SolverParams::default()
}

#[test]
fn exactness_examples() {
    let p = params();
    assert!(exactness_feasible(&big(0.2), 2, &p).unwrap().is_feasible());
    assert!(exactness_feasible(&big(0.1), 2, &p).unwrap().is_infeasible());
    assert!(exactness_feasible(&big(0.5), 1, &p).unwrap().is_infeasible());
    // at ε = 1 the first-order system is solvable only with q̃ = 0, so there is
    // no interior and the margin is 0
    match exactness_feasible(&BigScalar::one(P), 1, &p).unwrap() {
        Feasibility::Undecided { lower, upper, .. } => {
            assert!(lower <= big(1e-20) && upper >= big(-1e-20));
        }
        other => panic!("{other:?}"),
    }
    let above = closed_form_eps2(P) + &BigScalar::pow10(-4, P);
    assert!(exactness_feasible(&above, 2, &p).unwrap().is_feasible());
    assert!(matches!(exactness_feasible(&big(1.5), 2, &p), Err(StaircaseError::Domain(_))));
}

#[test]
fn closed_forms() {
    let e2 = closed_form_eps2(P);
    assert!((e2.clone() - &big(0.133_974_596_215_561_35)).abs() <= big(1e-16));
    assert!(eps2_discriminant(&e2).abs() <= BigScalar::pow10(-70, P));
    let e3 = closed_form_eps3_upper(P);
    assert!((e3.clone() - &big(4.712527e-3)).abs() <= big(1e-9));
    assert!(eps3_sextic(&e3).abs() <= BigScalar::pow10(-30, P));
}

#[test]
fn bound_examples() {
    let (lo, hi) = theoretical_bounds(1, P);
    assert!((lo.to_f64() - 4.2113e-3).abs() < 1e-6);
    assert_eq!(hi, big(0.25));
    assert!(lo <= closed_form_eps2(P) && closed_form_eps2(P) <= hi);
    let (lo0, hi0) = theoretical_bounds(0, P);
    assert_eq!((lo0.to_f64(), hi0.to_f64()), (1.0, 1.0));
    let (lo2, hi2) = theoretical_bounds(2, P);
    assert_eq!(hi2, big(0.0625));
    assert!(lo2 <= closed_form_eps3_upper(P) && closed_form_eps3_upper(P) <= hi2);
}

#[test]
fn farkas_examples() {
    for eta in [0.9, 0.99] {
        let rep = farkas_witness(&big(eta)).unwrap();
        assert!(rep.passed(), "{:?}", rep.checks);
        assert!(rep.u[0].signum_i() < 0);
    }
    let boundary = BigScalar::from_i64(3, P).sqrt().div_i64(2);
    assert!(matches!(farkas_witness(&boundary), Err(StaircaseError::Domain(_))));
    assert!(farkas_witness(&BigScalar::one(P)).is_err());
    // the determinant term η²(4η²−3)/(4(η+1)) vanishes at the boundary
    let eta = boundary;
    let term = &eta * &eta * ((&eta * &eta).mul_i64(4) - BigScalar::from_i64(3, P));
    assert!(term.abs() <= BigScalar::pow10(-70, P));
}

#[test]
fn first_threshold_is_one() {
    let enc = epsilon_threshold(1, &big(1e-6), &params()).unwrap();
    assert_eq!(enc.lo, BigScalar::one(P));
    assert_eq!(enc.hi, BigScalar::one(P));
    assert_eq!(enc.evidence.hi_status, EndpointStatus::Derived);
    assert!(matches!(epsilon_threshold(0, &big(1e-6), &params()), Err(StaircaseError::OrderTooLow)));
    assert!(matches!(epsilon_threshold(2, &big(0.0), &params()), Err(StaircaseError::BadTarget)));
}

#[test]
fn enclosures_are_sound_and_consistent_with_values() {
    let p = params();
    let width = big(1e-4);
    let e2 = epsilon_threshold(2, &width, &p).unwrap();
    let e3 = epsilon_threshold(3, &width, &p).unwrap();
    for (d, enc) in [(2, &e2), (3, &e3)] {
        assert!(enc.width() <= width);
        assert_eq!(enc.evidence.lo_status, EndpointStatus::Infeasible);
        assert!(enc.evidence.unresolved.is_none());
        let at = SolverParams { precision: enc.max_precision(), ..p.clone() };
        assert!(exactness_feasible(&enc.hi, d, &at).unwrap().is_feasible());
        assert!(exactness_feasible(&enc.lo, d, &at).unwrap().is_infeasible());

        let ten_gap = p.gap_tol_big().mul_i64(10);
        let pop = |e: &BigScalar| ParamPop::new(e.clone(), Variant::Univariate4).unwrap();
        for e in [enc.hi.clone(), enc.hi.mul_i64(3).div_i64(2)] {
            let v = solve_order(&pop(&e), d, &p).unwrap();
            assert!(v.abs() <= ten_gap, "d={d} eps={}: {}", e.to_sci(6), v.to_sci(6));
        }
        for e in [enc.lo.clone(), enc.lo.div_i64(2)] {
            let v = solve_order(&pop(&e), d, &p).unwrap();
            assert!(v <= -ten_gap.clone(), "d={d} eps={}: {}", e.to_sci(6), v.to_sci(6));
        }
    }
    assert!(e2.contains(&closed_form_eps2(P)));
    // the staircase descends
    assert!(e3.hi <= &e2.hi + &width);
}

#[test]
fn sweep_is_increasing_and_sandwiched() {
    let run = sweep(&[2, 3, 4], &Width::Relative(BigScalar::pow10(-3, P)), &params(), 3);
    let points: Vec<_> = run.points.into_iter().map(|p| p.unwrap()).collect();
    assert_eq!(points.iter().map(|p| p.d).collect::<Vec<_>>(), vec![2, 3, 4]);
    for w in points.windows(2) {
        assert!(w[1].log10_inv_hi() > w[0].log10_inv_hi());
    }
    assert!(points.iter().all(|p| p.sandwich_holds()));
    let slope = run.slope.unwrap().to_f64();
    assert!((3.0..4.0).contains(&slope), "{slope}");
}

#[test]
fn relative_and_absolute_widths_agree_on_eps2() {
    let a = epsilon_threshold_with(2, &Width::Relative(BigScalar::pow10(-4, P)), &params()).unwrap();
    assert!(a.width() <= a.hi.clone() * &BigScalar::pow10(-4, P));
    assert!(a.contains(&closed_form_eps2(P)));
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 8,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    /// Feasibility persists when ε grows, both as a solver verdict and through
    /// the explicit shift of a certificate found at ε.
    #[test]
    fn feasibility_is_monotone_in_epsilon(
        d in 2usize..=3,
        t in 0.0f64..1.0,
        ts in prop::collection::vec(0.0f64..1.0, 5),
    ) {
        let p = params();
        let start = if d == 2 { 0.135 } else { 4.8e-3 };
        let eps = big(start + (0.6 - start) * t);
        let sys = ExactnessSystem::new(&eps, d, P);
        let Feasibility::Feasible { y, .. } = sdp_feasibility(&sys.problem, &p).unwrap() else {
            return Err(TestCaseError::fail(format!("not feasible at {}", eps.to_sci(6))));
        };
        let cert = sys.certificate(&y);
        prop_assert!(verify_certificate(&cert.to_full()).passes());
        for s in ts {
            let delta = big((1.0 - eps.to_f64()) * s);
            let shifted = cert.shift_epsilon(&delta);
            let v = verify_certificate(&shifted.to_full());
            prop_assert!(v.passes(), "shift by {}: {:?}", delta.to_sci(4), v);
            let up = &eps + &delta;
            prop_assert!(exactness_feasible(&up, d, &p).unwrap().is_feasible());
        }
    }
}
