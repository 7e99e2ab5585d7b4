use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sos_staircase::sdp::{
    from_json, sdp_feasibility, sdp_solve, to_json, to_sdpa, AffineBlock, LinearEquality, RayCertificate, SdpProblem,
    SdpStatus, SolverParams,
};
use sos_staircase::{BigScalar, Matrix, Scalar};

const P: u32 = 256;

fn b(v: f64) -> BigScalar {
    BigScalar::from_f64(v, P)
}

/// `[[c00 + Σ a_i y_i, c01 + Σ b_i y_i], [., c11 + Σ c_i y_i]]`
fn block2(constant: [f64; 3], coeffs: &[[f64; 3]]) -> AffineBlock {
    let mut blk = AffineBlock::new(2, P);
    blk.add_constant(0, 0, &b(constant[0]));
    blk.add_constant(0, 1, &b(constant[1]));
    blk.add_constant(1, 1, &b(constant[2]));
    for (i, c) in coeffs.iter().enumerate() {
        for (k, (r, s)) in [(0, 0), (0, 1), (1, 1)].into_iter().enumerate() {
            if c[k] != 0.0 {
                blk.add_coeff(i, r, s, &b(c[k]));
            }
        }
    }
    blk
}

fn scalar_block(constant: f64, coeffs: &[f64]) -> AffineBlock {
    let mut blk = AffineBlock::new(1, P);
    blk.add_constant(0, 0, &b(constant));
    for (i, c) in coeffs.iter().enumerate() {
        if *c != 0.0 {
            blk.add_coeff(i, 0, 0, &b(*c));
        }
    }
    blk
}

fn first_relaxation(eps: &BigScalar) -> SdpProblem {
    let mut p = SdpProblem::new(2, P);
    p.objective = vec![b(1.0), b(0.0)];
    p.blocks = vec![
        block2([1.0, 0.0, 0.0], &[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
        scalar_block(1.0, &[0.0, -1.0]),
        scalar_block(0.0, &[1.0]),
    ];
    p.blocks[2].add_coeff(1, 0, 0, &(BigScalar::one(P) - eps));
    p
}

#[test]
fn first_relaxation_value() {
    let sol = sdp_solve(&first_relaxation(&BigScalar::ratio(1, 10, P)), &SolverParams::default()).unwrap();
    assert_eq!(sol.status, SdpStatus::Optimal, "{}", sol.diagnostics);
    assert!((sol.primal_obj.clone() - &BigScalar::ratio(-9, 10, P)).abs() < b(1e-20));
    assert!(sol.gap <= b(1e-25));
}

#[test]
fn unit_disc_value() {
    let mut p = SdpProblem::new(1, P);
    p.objective[0] = b(1.0);
    p.blocks.push(block2([1.0, 0.0, 1.0], &[[0.0, 1.0, 0.0]]));
    let sol = sdp_solve(&p, &SolverParams::default()).unwrap();
    assert_eq!(sol.status, SdpStatus::Optimal);
    assert!((sol.y[0].clone() + &b(1.0)).abs() < b(1e-20));
}

#[test]
fn feasibility_examples() {
    let params = SolverParams::default();
    let mut p = SdpProblem::new(1, P);
    p.blocks.push(scalar_block(0.0, &[1.0]));
    p.equalities.push(LinearEquality { coeffs: vec![(0, b(1.0))], rhs: b(1.0) });
    assert!(sdp_feasibility(&p, &params).unwrap().is_feasible());

    let mut q = SdpProblem::new(1, P);
    q.blocks.push(scalar_block(0.0, &[1.0]));
    q.blocks.push(scalar_block(-1.0, &[-1.0]));
    assert!(sdp_feasibility(&q, &params).unwrap().is_infeasible());
}

#[test]
fn infeasible_problem_carries_a_valid_farkas_certificate() {
    let mut q = SdpProblem::new(1, P);
    q.blocks.push(scalar_block(0.0, &[1.0]));
    q.blocks.push(scalar_block(-1.0, &[-1.0]));
    let params = SolverParams::default();
    let sol = sdp_solve(&q, &params).unwrap();
    assert_eq!(sol.status, SdpStatus::PrimalInfeasible, "{}", sol.diagnostics);
    let Some(RayCertificate::Farkas { block_weights, equality_weights, margin }) = sol.certificate else {
        panic!("missing Farkas certificate");
    };
    assert!(margin >= params.feas_tol_big());
    let tol = b(1e-40);
    for w in &block_weights {
        assert!(w.psd_check() >= -params.feas_tol_big());
    }
    // Σ_k ⟨F_k1, W_k⟩ = 0 (no equalities), Σ_k ⟨F_k0, W_k⟩ = −margin
    let lin: BigScalar = q
        .blocks
        .iter()
        .zip(&block_weights)
        .filter_map(|(blk, w)| blk.coefficient(0).map(|f| f.frob(w)))
        .fold(BigScalar::zero(P), |a, x| a + &x);
    assert!(lin.abs() <= tol);
    assert!(equality_weights.is_empty());
    let cst = q
        .blocks
        .iter()
        .zip(&block_weights)
        .map(|(blk, w)| blk.constant().frob(w))
        .fold(BigScalar::zero(P), |a, x| a + &x);
    assert!((cst + &margin).abs() <= tol);
}

#[test]
fn json_and_sdpa_round_trip() {
    let p = first_relaxation(&BigScalar::ratio(1, 4, P));
    let doc = to_json(&p);
    assert_eq!(doc["schema"], "sdp-v1");
    let back = from_json(&doc, None).unwrap();
    assert_eq!(back, p);
    let dump = to_sdpa(&p);
    assert!(dump.lines().count() > 3);
}

fn feasible_f64(blocks: &[([f64; 3], Vec<[f64; 3]>)], y: &[f64; 3]) -> bool {
    blocks.iter().all(|(c, coeffs)| {
        let mut m = *c;
        for (i, a) in coeffs.iter().enumerate() {
            for k in 0..3 {
                m[k] += a[k] * y[i];
            }
        }
        m[0] >= 0.0 && m[2] >= 0.0 && m[0] * m[2] - m[1] * m[1] >= 0.0
    })
}

/// Minimum of `c·y` over feasible points of a grid that is refined three
/// times around the best point found so far.
fn grid_oracle(blocks: &[([f64; 3], Vec<[f64; 3]>)], c: &[f64; 3]) -> f64 {
    let mut best = f64::INFINITY;
    let mut center = [0.0f64; 3];
    for (half, step) in [(1.0, 0.02), (0.04, 0.002), (0.004, 0.0002)] {
        let n = (2.0 * half / step) as i64;
        let start = center;
        for i in 0..=n {
            for j in 0..=n {
                for k in 0..=n {
                    let y = [
                        start[0] - half + i as f64 * step,
                        start[1] - half + j as f64 * step,
                        start[2] - half + k as f64 * step,
                    ];
                    if y.iter().any(|v| v.abs() > 1.0) || !feasible_f64(blocks, &y) {
                        continue;
                    }
                    let v = c[0] * y[0] + c[1] * y[1] + c[2] * y[2];
                    if v < best {
                        best = v;
                        center = y;
                    }
                }
            }
        }
    }
    best
}

#[test]
fn random_three_variable_sdps_match_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..3 {
        let mut blocks: Vec<([f64; 3], Vec<[f64; 3]>)> = Vec::new();
        // |y_i| ≤ 1 boxes, plus a random coupling block strictly feasible at 0
        for i in 0..3 {
            let mut coeffs = vec![[0.0; 3]; 3];
            coeffs[i] = [0.0, 1.0, 0.0];
            blocks.push(([1.0, 0.0, 1.0], coeffs));
        }
        let coeffs: Vec<[f64; 3]> = (0..3)
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        blocks.push(([1.0, rng.gen_range(-0.3..0.3), 1.0], coeffs));
        let mut c = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        c.iter_mut().for_each(|v| *v /= norm);

        let mut p = SdpProblem::new(3, P);
        p.objective = c.iter().map(|&v| b(v)).collect();
        p.blocks = blocks.iter().map(|(k, a)| block2(*k, a)).collect();
        let sol = sdp_solve(&p, &SolverParams::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal, "{}", sol.diagnostics);
        let oracle = grid_oracle(&blocks, &c);
        let v = sol.primal_obj.to_f64();
        assert!(v <= oracle + 1e-9, "solver {v} above a feasible grid value {oracle}");
        assert!(oracle - v <= 1e-3, "solver {v} vs grid {oracle}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 24,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    /// Random bounded problems: optimal solutions honour the tolerances they
    /// report and dual matrices are PSD.
    #[test]
    fn optimal_solutions_meet_tolerances(
        cs in prop::collection::vec(-1.0f64..1.0, 2),
        couple in prop::collection::vec(-1.0f64..1.0, 6),
        off in -0.5f64..0.5,
    ) {
        let mut p = SdpProblem::new(2, P);
        p.objective = cs.iter().map(|&v| b(v)).collect();
        p.blocks.push(block2([1.0, 0.0, 1.0], &[[0.0, 1.0, 0.0], [0.0, 0.0, 0.0]]));
        p.blocks.push(block2([1.0, 0.0, 1.0], &[[0.0, 0.0, 0.0], [0.0, 1.0, 0.0]]));
        p.blocks.push(block2([1.0, off, 1.0], &[[couple[0], couple[1], couple[2]], [couple[3], couple[4], couple[5]]]));
        let params = SolverParams::default();
        let sol = sdp_solve(&p, &params).unwrap();
        prop_assert_eq!(sol.status, SdpStatus::Optimal, "{}", sol.diagnostics);
        prop_assert!(sol.gap <= params.gap_tol_big());
        prop_assert!((&sol.primal_obj - &sol.dual_obj).abs() <= params.gap_tol_big());
        for m in p.evaluate_blocks(&sol.y) {
            prop_assert!(m.psd_check() >= -params.feas_tol_big());
        }
        for w in &sol.block_duals {
            prop_assert!(w.psd_check() >= -params.feas_tol_big());
        }
    }

    /// `psd_check` never exceeds the smallest eigenvalue and is close to it.
    #[test]
    fn psd_check_is_a_tight_lower_bound(a in -3.0f64..3.0, bb in -3.0f64..3.0, c in -3.0f64..3.0) {
        let m = Matrix::from_rows(vec![vec![b(a), b(bb)], vec![b(bb), b(c)]]);
        let half_tr = (b(a) + &b(c)).div_i64(2);
        let half_diff = (b(a) - &b(c)).div_i64(2);
        let disc = (&half_diff * &half_diff + &(b(bb) * b(bb))).sqrt();
        let lmin = half_tr - &disc;
        let lb = m.psd_check();
        prop_assert!(lb <= &lmin + &b(1e-70));
        prop_assert!(lb >= lmin - &b(1e-30));
    }
}
