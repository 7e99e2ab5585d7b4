//! Primal-dual path following (HKM direction, Mehrotra predictor-corrector).
//!
//! Equalities are eliminated first (`y = y_p + N z`), and the remaining LMI
//! problem is solved as the dual of the standard form
//!
//! ```text
//! (P) min ⟨C, X⟩  s.t. ⟨A_j, X⟩ = b_j, X ⪰ 0
//! (D) max b·z     s.t. C − Σ z_j A_j = Z ⪰ 0
//! ```
//!
//! with `C = B(y_p)`, `A_j = −Σ_i N_ij F_i` and `b = −Nᵀc`.

use crate::error::SdpError;
use crate::linalg::{affine_solution_space, Matrix};
use crate::scalar::{BigScalar, Scalar};

use super::{RayCertificate, SdpProblem, SdpSolution, SdpStatus, SolverParams};

/// Snapshot handed to a monitor once per iteration.
pub struct IterateView<'a> {
    pub iteration: usize,
    /// Current point in the original variables.
    pub y: &'a [BigScalar],
    pub primal_obj: &'a BigScalar,
    pub dual_obj: &'a BigScalar,
    /// Largest entry of `B(y) − Z` over the blocks.
    pub primal_residual: &'a BigScalar,
    /// Largest violation of the dual linear constraints.
    pub dual_residual: &'a BigScalar,
    pub mu: &'a BigScalar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonitorAction {
    Continue,
    Stop,
}

struct Reduced {
    prec: u32,
    yp: Vec<BigScalar>,
    /// Columns of `N` that survived (variables touching some block).
    cols: Vec<Vec<BigScalar>>,
    c_const: BigScalar,
    b: Vec<BigScalar>,
    c: Vec<Matrix<BigScalar>>,
    /// `a[j][k]`: coefficient of `z_j` in block `k`, `None` when zero.
    a: Vec<Vec<Option<Matrix<BigScalar>>>>,
}

enum Reduction {
    Ready(Reduced),
    Done(SdpSolution),
}

fn zero_solution(p: &SdpProblem, prec: u32) -> SdpSolution {
    let z = BigScalar::zero(prec);
    SdpSolution {
        y: vec![z.clone(); p.num_vars],
        block_duals: p
            .blocks
            .iter()
            .map(|b| Matrix::zeros(b.dim(), b.dim(), prec))
            .collect(),
        equality_duals: vec![z.clone(); p.equalities.len()],
        primal_obj: z.clone(),
        dual_obj: z.clone(),
        gap: z,
        status: SdpStatus::Undecided,
        iterations: 0,
        certificate: None,
        diagnostics: String::new(),
    }
}

fn reduce(p: &SdpProblem, params: &SolverParams) -> Reduction {
    let prec = params.precision;
    let n = p.num_vars;
    let up = |v: &BigScalar| v.with_prec(prec);
    let space = if p.equalities.is_empty() {
        crate::linalg::AffineSpace {
            particular: vec![BigScalar::zero(prec); n],
            basis: (0..n)
                .map(|i| {
                    let mut e = vec![BigScalar::zero(prec); n];
                    e[i] = BigScalar::one(prec);
                    e
                })
                .collect(),
        }
    } else {
        let rows: Vec<Vec<BigScalar>> = p
            .equalities
            .iter()
            .map(|e| {
                let mut r = vec![BigScalar::zero(prec); n];
                for (v, c) in &e.coeffs {
                    r[*v] += up(c);
                }
                r
            })
            .collect();
        let rhs: Vec<BigScalar> = p.equalities.iter().map(|e| up(&e.rhs)).collect();
        match affine_solution_space(&rows, &rhs, n, prec) {
            Ok(s) => s,
            Err(comb) => {
                let dot = comb
                    .iter()
                    .zip(&rhs)
                    .fold(BigScalar::zero(prec), |acc, (w, b)| acc + &(w * b));
                let sign = if dot.signum_i() > 0 { -1 } else { 1 };
                let mut sol = zero_solution(p, prec);
                sol.status = SdpStatus::PrimalInfeasible;
                sol.certificate = Some(RayCertificate::Farkas {
                    block_weights: sol.block_duals.clone(),
                    equality_weights: comb.iter().map(|w| w.mul_i64(sign)).collect(),
                    margin: dot.abs(),
                });
                sol.diagnostics = "linear equalities are inconsistent".into();
                return Reduction::Done(sol);
            }
        }
    };

    let blocks: Vec<_> = p
        .blocks
        .iter()
        .map(|b| {
            let c0 = b.constant().map(up);
            let terms: Vec<(usize, Matrix<BigScalar>)> =
                b.terms().map(|(k, m)| (k, m.map(up))).collect();
            (c0, terms)
        })
        .collect();
    let obj: Vec<BigScalar> = p.objective.iter().map(up).collect();

    let mut c = Vec::with_capacity(blocks.len());
    for (c0, terms) in &blocks {
        let mut m = c0.clone();
        for (k, f) in terms {
            if !space.particular[*k].is_zero() {
                m.axpy(&space.particular[*k], f);
            }
        }
        c.push(m);
    }
    let c_const = obj
        .iter()
        .zip(&space.particular)
        .fold(BigScalar::zero(prec), |acc, (a, b)| acc + &(a * b));

    let mut cols = Vec::new();
    let mut bvec = Vec::new();
    let mut a = Vec::new();
    for col in &space.basis {
        let mut mats = Vec::with_capacity(blocks.len());
        let mut touches = false;
        for (c0, terms) in &blocks {
            let mut m: Option<Matrix<BigScalar>> = None;
            for (k, f) in terms {
                if col[*k].is_zero() {
                    continue;
                }
                let coeff = -col[*k].clone();
                m.get_or_insert_with(|| Matrix::zeros(c0.rows(), c0.rows(), prec))
                    .axpy(&coeff, f);
            }
            if let Some(mm) = &m {
                if mm.max_abs().is_some_and(|v| !v.is_zero()) {
                    touches = true;
                } else {
                    m = None;
                }
            }
            mats.push(m);
        }
        let nc = col
            .iter()
            .zip(&obj)
            .fold(BigScalar::zero(prec), |acc, (a, b)| acc + &(a * b));
        if !touches {
            if nc.is_zero() {
                continue;
            }
            // A free direction with nonzero cost: the objective is unbounded.
            let sign = if nc.signum_i() > 0 { -1 } else { 1 };
            let mut sol = zero_solution(p, prec);
            sol.y = space.particular.clone();
            sol.status = SdpStatus::DualInfeasible;
            sol.certificate = Some(RayCertificate::ImprovingRay {
                direction: col.iter().map(|v| v.mul_i64(sign)).collect(),
                margin: nc.abs(),
            });
            sol.diagnostics = "a variable direction leaves every block unchanged".into();
            return Reduction::Done(sol);
        }
        cols.push(col.clone());
        bvec.push(-nc);
        a.push(mats);
    }
    Reduction::Ready(Reduced {
        prec,
        yp: space.particular,
        cols,
        c_const,
        b: bvec,
        c,
        a,
    })
}

impl Reduced {
    fn y_of(&self, z: &[BigScalar]) -> Vec<BigScalar> {
        let mut y = self.yp.clone();
        for (zj, col) in z.iter().zip(&self.cols) {
            if zj.is_zero() {
                continue;
            }
            for (yi, ni) in y.iter_mut().zip(col) {
                if !ni.is_zero() {
                    *yi += zj * ni;
                }
            }
        }
        y
    }

    /// `Σ_j w_j A_jk` for every block `k`.
    fn combine(&self, w: &[BigScalar]) -> Vec<Matrix<BigScalar>> {
        let mut out: Vec<Matrix<BigScalar>> = self
            .c
            .iter()
            .map(|c| Matrix::zeros(c.rows(), c.rows(), self.prec))
            .collect();
        for (j, mats) in self.a.iter().enumerate() {
            for (k, m) in mats.iter().enumerate() {
                if let Some(m) = m {
                    out[k].axpy(&w[j], m);
                }
            }
        }
        out
    }

    /// `⟨A_j, W⟩` for every `j`.
    fn apply(&self, w: &[Matrix<BigScalar>]) -> Vec<BigScalar> {
        self.a
            .iter()
            .map(|mats| {
                mats.iter()
                    .zip(w)
                    .filter_map(|(m, wk)| m.as_ref().map(|m| m.frob(wk)))
                    .fold(BigScalar::zero(self.prec), |acc, v| acc + &v)
            })
            .collect()
    }
}

fn inner(a: &[Matrix<BigScalar>], b: &[Matrix<BigScalar>], prec: u32) -> BigScalar {
    a.iter()
        .zip(b)
        .fold(BigScalar::zero(prec), |acc, (x, y)| acc + &x.frob(y))
}

fn max_abs_vec(v: &[BigScalar], prec: u32) -> BigScalar {
    v.iter().fold(BigScalar::zero(prec), |acc, x| acc.max(x.abs()))
}

fn max_abs_mats(v: &[Matrix<BigScalar>], prec: u32) -> BigScalar {
    v.iter()
        .filter_map(Matrix::max_abs)
        .fold(BigScalar::zero(prec), BigScalar::max)
}

fn breakdown(iterations: usize, reason: &str) -> SdpError {
    SdpError::NumericalBreakdown {
        iterations,
        reason: reason.into(),
    }
}

/// Largest admissible step for every block, scaled by `fraction` and capped at 1.
fn step_length(
    chols: &[Matrix<BigScalar>],
    d: &[Matrix<BigScalar>],
    fraction: &BigScalar,
    prec: u32,
) -> BigScalar {
    let one = BigScalar::one(prec);
    let mut alpha = one.clone();
    for (l, dm) in chols.iter().zip(d) {
        if let Some(m) = Matrix::max_step(l, dm) {
            let a = &m * fraction;
            if a < alpha {
                alpha = a;
            }
        }
    }
    alpha
}

struct Direction {
    dz: Vec<BigScalar>,
    dx: Vec<Matrix<BigScalar>>,
    dzm: Vec<Matrix<BigScalar>>,
}

struct NewtonContext<'a> {
    red: &'a Reduced,
    x: &'a [Matrix<BigScalar>],
    zinv: &'a [Matrix<BigScalar>],
    rp: &'a [BigScalar],
    rd: &'a [Matrix<BigScalar>],
    schur: Schur,
}

enum Schur {
    Chol(Matrix<BigScalar>),
    Dense(Matrix<BigScalar>),
}

impl NewtonContext<'_> {
    fn direction(
        &self,
        sigma_mu: &BigScalar,
        k: Option<&[Matrix<BigScalar>]>,
        iteration: usize,
    ) -> Result<Direction, SdpError> {
        let red = self.red;
        // T = σμ Z⁻¹ − X − (X Rd + K) Z⁻¹
        let mut t = Vec::with_capacity(self.x.len());
        for (idx, (x, zi)) in self.x.iter().zip(self.zinv).enumerate() {
            let mut inner = x.mul(&self.rd[idx]);
            if let Some(k) = k {
                inner = inner.add(&k[idx]);
            }
            let mut tb = zi.scale(sigma_mu).sub(x);
            tb = tb.sub(&inner.mul(zi));
            t.push(tb);
        }
        let at = red.apply(&t);
        let rhs: Vec<BigScalar> = self.rp.iter().zip(&at).map(|(r, a)| r - a).collect();
        let dz = match &self.schur {
            Schur::Chol(l) => Matrix::cholesky_solve(l, &rhs),
            Schur::Dense(m) => m
                .lu_solve(&rhs)
                .ok_or_else(|| breakdown(iteration, "singular Schur complement"))?,
        };
        let comb = red.combine(&dz);
        let mut dzm = Vec::with_capacity(comb.len());
        let mut dx = Vec::with_capacity(comb.len());
        for (idx, cm) in comb.iter().enumerate() {
            let dzb = self.rd[idx].sub(cm);
            let x = &self.x[idx];
            let zi = &self.zinv[idx];
            let mut prod = x.mul(&dzb);
            if let Some(k) = k {
                prod = prod.add(&k[idx]);
            }
            let dxb = zi.scale(sigma_mu).sub(x).sub(&prod.mul(zi)).symmetrize();
            dzm.push(dzb);
            dx.push(dxb);
        }
        Ok(Direction { dz, dx, dzm })
    }
}

/// Solves `p` with the default monitor (never stops early).
pub fn sdp_solve(p: &SdpProblem, params: &SolverParams) -> Result<SdpSolution, SdpError> {
    sdp_solve_monitored(p, params, |_| MonitorAction::Continue)
}

/// Like [`sdp_solve`], calling `monitor` once per iteration. A `Stop`
/// returns the current iterate with status `Undecided`.
pub fn sdp_solve_monitored(
    p: &SdpProblem,
    params: &SolverParams,
    mut monitor: impl FnMut(&IterateView<'_>) -> MonitorAction,
) -> Result<SdpSolution, SdpError> {
    params.validate()?;
    p.validate()?;
    let red = match reduce(p, params) {
        Reduction::Done(sol) => return Ok(sol),
        Reduction::Ready(r) => r,
    };
    let prec = red.prec;
    let m = red.b.len();
    let dims: Vec<usize> = red.c.iter().map(Matrix::rows).collect();
    let n_total: usize = dims.iter().sum();
    let nt = BigScalar::from_i64(n_total as i64, prec);
    let one = BigScalar::one(prec);
    let gap_tol = params.gap_tol_big();
    let feas_tol = params.feas_tol_big();
    let fraction = BigScalar::from_f64(params.step_fraction, prec);
    let big = BigScalar::pow2(prec as i32 / 4, prec);
    let tiny = BigScalar::pow2(-(prec as i32) / 2, prec);

    // Scaled-identity starting point.
    let a_norms: Vec<Vec<BigScalar>> = red
        .a
        .iter()
        .map(|mats| {
            mats.iter()
                .map(|mm| mm.as_ref().map_or(BigScalar::zero(prec), Matrix::frob_norm))
                .collect()
        })
        .collect();
    let mut x = Vec::with_capacity(dims.len());
    let mut zm = Vec::with_capacity(dims.len());
    for (k, &nk) in dims.iter().enumerate() {
        let nkb = BigScalar::from_i64(nk as i64, prec);
        let mut alpha = one.clone();
        let mut amax = BigScalar::zero(prec);
        for j in 0..m {
            let an = &a_norms[j][k];
            let r = (&one + &red.b[j].abs()) / (&one + an);
            alpha = alpha.max(r);
            amax = amax.max(an.clone());
        }
        let alpha = &nkb * &alpha;
        let beta = (&one + &amax.max(red.c[k].frob_norm())) / nkb.sqrt();
        let ten = BigScalar::from_i64(10, prec);
        x.push(Matrix::eye(nk, prec).scale(&(&ten * &alpha)));
        zm.push(Matrix::eye(nk, prec).scale(&(&ten * &beta)));
    }
    let mut z = vec![BigScalar::zero(prec); m];

    let mut best_merit: Option<BigScalar> = None;
    let mut since_best = 0usize;
    let mut last_y = red.y_of(&z);
    let mut last = (
        BigScalar::zero(prec),
        BigScalar::zero(prec),
        String::from("iteration limit reached"),
    );

    for iter in 0..params.max_iters {
        let ax = red.apply(&x);
        let rp: Vec<BigScalar> = red.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let comb = red.combine(&z);
        let rd: Vec<Matrix<BigScalar>> = red
            .c
            .iter()
            .zip(&comb)
            .zip(&zm)
            .map(|((c, s), zz)| c.sub(s).sub(zz))
            .collect();
        let pobj = inner(&red.c, &x, prec);
        let dobj = red
            .b
            .iter()
            .zip(&z)
            .fold(BigScalar::zero(prec), |acc, (b, zz)| acc + &(b * zz));
        let primal_obj = &red.c_const - &dobj;
        let dual_obj = &red.c_const - &pobj;
        let gap = &primal_obj - &dual_obj;
        let mu = inner(&x, &zm, prec) / &nt;
        let rp_max = max_abs_vec(&rp, prec);
        let rd_max = max_abs_mats(&rd, prec);
        let y = red.y_of(&z);

        let view = IterateView {
            iteration: iter,
            y: &y,
            primal_obj: &primal_obj,
            dual_obj: &dual_obj,
            primal_residual: &rd_max,
            dual_residual: &rp_max,
            mu: &mu,
        };
        let action = monitor(&view);

        let finish = |status: SdpStatus,
                      cert: Option<RayCertificate>,
                      diag: String,
                      y: Vec<BigScalar>| {
            let eq_duals = equality_multipliers(p, &x, &red, prec);
            SdpSolution {
                y,
                block_duals: x.clone(),
                equality_duals: eq_duals,
                primal_obj: primal_obj.clone(),
                dual_obj: dual_obj.clone(),
                gap: gap.abs(),
                status,
                iterations: iter,
                certificate: cert,
                diagnostics: diag,
            }
        };

        if action == MonitorAction::Stop {
            return Ok(finish(SdpStatus::Undecided, None, "stopped by monitor".into(), y));
        }
        if gap.abs() <= gap_tol && rp_max <= feas_tol && rd_max <= feas_tol {
            return Ok(finish(SdpStatus::Optimal, None, "converged".into(), y));
        }

        // Divergence of X: a Farkas certificate that the LMI is empty.
        let tr = x.iter().fold(BigScalar::zero(prec), |acc, xx| acc + &xx.trace());
        if tr > big {
            let w: Vec<Matrix<BigScalar>> = x.iter().map(|xx| xx.scale(&tr.recip())).collect();
            let cw = inner(&red.c, &w, prec);
            let aw = max_abs_vec(&red.apply(&w), prec);
            if cw.signum_i() < 0 && -cw.clone() >= feas_tol && &aw * &big <= -cw.clone() {
                let cert = farkas_from_weights(p, &w, &red, -cw.clone(), prec);
                return Ok(finish(
                    SdpStatus::PrimalInfeasible,
                    Some(cert),
                    "block duals diverge along a separating direction".into(),
                    y,
                ));
            }
        }
        // Divergence of z: an improving ray.
        let zmax = max_abs_vec(&z, prec);
        if zmax > big {
            let zh: Vec<BigScalar> = z.iter().map(|v| v / &zmax).collect();
            let bz = red
                .b
                .iter()
                .zip(&zh)
                .fold(BigScalar::zero(prec), |acc, (b, v)| acc + &(b * v));
            if bz >= feas_tol {
                let dirs = red.combine(&zh);
                let ok = dirs.iter().all(|d| d.scale(&BigScalar::from_i64(-1, prec)).psd_check() >= -tiny.clone());
                if ok {
                    let dir = red.y_of(&zh);
                    let dir: Vec<BigScalar> =
                        dir.iter().zip(&red.yp).map(|(a, b)| a - b).collect();
                    return Ok(finish(
                        SdpStatus::DualInfeasible,
                        Some(RayCertificate::ImprovingRay {
                            direction: dir,
                            margin: bz,
                        }),
                        "objective decreases without bound along a feasible ray".into(),
                        y,
                    ));
                }
            }
        }

        let merit = gap.abs().max(rp_max.clone()).max(rd_max.clone());
        match &best_merit {
            Some(b) if merit >= b.clone() * BigScalar::ratio(999, 1000, prec) => {
                since_best += 1;
            }
            _ => {
                best_merit = Some(merit);
                since_best = 0;
            }
        }
        if since_best >= 40 {
            return Ok(finish(
                SdpStatus::Undecided,
                None,
                format!(
                    "stalled: gap {} primal residual {} dual residual {}",
                    gap.to_sci(6),
                    rd_max.to_sci(6),
                    rp_max.to_sci(6)
                ),
                y,
            ));
        }

        // Newton system.
        let mut zchol = Vec::with_capacity(zm.len());
        let mut zinv = Vec::with_capacity(zm.len());
        let mut xchol = Vec::with_capacity(x.len());
        for (zz, xx) in zm.iter().zip(&x) {
            let lz = zz
                .cholesky()
                .ok_or_else(|| breakdown(iter, "slack matrix lost definiteness"))?;
            zinv.push(Matrix::spd_inverse(&lz));
            zchol.push(lz);
            xchol.push(
                xx.cholesky()
                    .ok_or_else(|| breakdown(iter, "dual matrix lost definiteness"))?,
            );
        }
        let mut g: Vec<Vec<Option<Matrix<BigScalar>>>> = Vec::with_capacity(m);
        for mats in &red.a {
            g.push(
                mats.iter()
                    .enumerate()
                    .map(|(k, am)| am.as_ref().map(|am| x[k].mul(am).mul(&zinv[k])))
                    .collect(),
            );
        }
        let mut mm = Matrix::zeros(m, m, prec);
        for i in 0..m {
            for j in 0..m {
                let mut s = BigScalar::zero(prec);
                for k in 0..dims.len() {
                    if let (Some(ai), Some(gj)) = (&red.a[i][k], &g[j][k]) {
                        s += ai.frob(gj);
                    }
                }
                mm[(i, j)] = s;
            }
        }
        let mm = mm.symmetrize();
        let schur = match mm.cholesky() {
            Some(l) => Schur::Chol(l),
            None => Schur::Dense(mm),
        };
        let ctx = NewtonContext {
            red: &red,
            x: &x,
            zinv: &zinv,
            rp: &rp,
            rd: &rd,
            schur,
        };

        let zero = BigScalar::zero(prec);
        let pred = ctx.direction(&zero, None, iter)?;
        let ap = step_length(&xchol, &pred.dx, &one, prec);
        let ad = step_length(&zchol, &pred.dzm, &one, prec);
        let mut mu_aff = BigScalar::zero(prec);
        for k in 0..dims.len() {
            let mut xa = x[k].clone();
            xa.axpy(&ap, &pred.dx[k]);
            let mut za = zm[k].clone();
            za.axpy(&ad, &pred.dzm[k]);
            mu_aff += xa.frob(&za);
        }
        let mu_aff = mu_aff / &nt;
        let mut sigma = if mu.signum_i() > 0 {
            (&mu_aff / &mu).powi(3)
        } else {
            zero.clone()
        };
        if sigma > one {
            sigma = one.clone();
        }
        if sigma.signum_i() < 0 {
            sigma = zero.clone();
        }
        let k: Vec<Matrix<BigScalar>> = pred
            .dx
            .iter()
            .zip(&pred.dzm)
            .map(|(a, b)| a.mul(b))
            .collect();
        let corr = ctx.direction(&(&sigma * &mu), Some(&k), iter)?;
        let ap = step_length(&xchol, &corr.dx, &fraction, prec);
        let ad = step_length(&zchol, &corr.dzm, &fraction, prec);

        for k in 0..dims.len() {
            x[k].axpy(&ap, &corr.dx[k]);
            zm[k].axpy(&ad, &corr.dzm[k]);
        }
        for (zj, dj) in z.iter_mut().zip(&corr.dz) {
            *zj += &ad * dj;
        }
        last_y = y;
        last = (gap, rd_max, format!("iteration limit reached (mu {})", mu.to_sci(6)));
    }

    let mut sol = zero_solution(p, prec);
    sol.y = last_y;
    sol.primal_obj = p.objective_value(&sol.y);
    sol.gap = last.0.abs();
    sol.dual_obj = &sol.primal_obj - &sol.gap;
    sol.block_duals = x;
    sol.iterations = params.max_iters;
    sol.diagnostics = last.2;
    Ok(sol)
}

/// Least-squares multipliers `μ` for the equalities given block duals `W`:
/// `Aeqᵀ μ ≈ c − g` with `g_i = Σ_k ⟨F_ki, W_k⟩`.
fn equality_multipliers(
    p: &SdpProblem,
    w: &[Matrix<BigScalar>],
    red: &Reduced,
    prec: u32,
) -> Vec<BigScalar> {
    let g = block_gradient(p, w, prec);
    let target: Vec<BigScalar> = p
        .objective
        .iter()
        .zip(&g)
        .map(|(c, gi)| c.with_prec(prec) - gi)
        .collect();
    least_squares_multipliers(p, &target, red.prec)
}

fn block_gradient(p: &SdpProblem, w: &[Matrix<BigScalar>], prec: u32) -> Vec<BigScalar> {
    let mut g = vec![BigScalar::zero(prec); p.num_vars];
    for (b, wk) in p.blocks.iter().zip(w) {
        for (i, f) in b.terms() {
            g[i] += f.frob(wk);
        }
    }
    g
}

fn least_squares_multipliers(p: &SdpProblem, target: &[BigScalar], prec: u32) -> Vec<BigScalar> {
    let ne = p.equalities.len();
    if ne == 0 {
        return Vec::new();
    }
    let mut a = Matrix::zeros(ne, p.num_vars, prec);
    for (j, e) in p.equalities.iter().enumerate() {
        for (v, c) in &e.coeffs {
            a[(j, *v)] += c.with_prec(prec);
        }
    }
    let at = a.transpose();
    let mut normal = a.mul(&at);
    let rhs = a.mat_vec(target);
    if let Some(sol) = normal.lu_solve(&rhs) {
        return sol;
    }
    let ridge = BigScalar::pow2(-(prec as i32) / 2, prec);
    for i in 0..ne {
        normal[(i, i)] += &ridge;
    }
    normal
        .lu_solve(&rhs)
        .unwrap_or_else(|| vec![BigScalar::zero(prec); ne])
}

fn farkas_from_weights(
    p: &SdpProblem,
    w: &[Matrix<BigScalar>],
    red: &Reduced,
    margin: BigScalar,
    prec: u32,
) -> RayCertificate {
    let g = block_gradient(p, w, prec);
    let mu = least_squares_multipliers(p, &g, red.prec);
    RayCertificate::Farkas {
        block_weights: w.to_vec(),
        equality_weights: mu,
        margin,
    }
}
