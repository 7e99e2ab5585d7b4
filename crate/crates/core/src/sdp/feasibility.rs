use crate::error::SdpError;
use crate::linalg::Matrix;
use crate::scalar::{BigScalar, Scalar};

use super::ipm::{sdp_solve_monitored, IterateView, MonitorAction};
use super::{AffineBlock, SdpProblem, SdpStatus, SolverParams};

/// Outcome of [`sdp_feasibility`].
#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    /// `y` satisfies the equalities and every block has smallest eigenvalue
    /// at least `margin ≥ feas_tol`.
    Feasible { margin: BigScalar, y: Vec<BigScalar> },
    /// A dual bound proves that no `y` reaches smallest eigenvalue above
    /// `−margin`, with `margin ≥ feas_tol`.
    Infeasible { margin: BigScalar },
    /// The optimal margin could not be separated from zero; `lower ≤ λ* ≤ upper`
    /// as far as the last iterate shows.
    Undecided {
        lower: BigScalar,
        upper: BigScalar,
        reason: String,
    },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, Feasibility::Infeasible { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Feasibility::Feasible { .. } => "Feasible",
            Feasibility::Infeasible { .. } => "Infeasible",
            Feasibility::Undecided { .. } => "Undecided",
        }
    }
}

fn augment(p: &SdpProblem, prec: u32) -> SdpProblem {
    let n = p.num_vars;
    let lam = n;
    let mut aug = SdpProblem::new(n + 1, prec);
    aug.objective[lam] = BigScalar::from_i64(-1, prec);
    aug.equalities = p.equalities.clone();
    for b in &p.blocks {
        let mut terms: Vec<(usize, Matrix<BigScalar>)> =
            b.terms().map(|(k, m)| (k, m.clone())).collect();
        terms.push((lam, Matrix::eye(b.dim(), prec).scale(&BigScalar::from_i64(-1, prec))));
        aug.blocks
            .push(AffineBlock::from_parts(b.constant().clone(), terms));
    }
    let mut cap = AffineBlock::new(1, prec);
    cap.add_constant(0, 0, &BigScalar::one(prec));
    cap.add_coeff(lam, 0, 0, &BigScalar::from_i64(-1, prec));
    aug.blocks.push(cap);
    aug
}

fn min_block_margin(p: &SdpProblem, y: &[BigScalar]) -> BigScalar {
    p.evaluate_blocks(y)
        .iter()
        .map(Matrix::psd_check)
        .reduce(BigScalar::min)
        .expect("at least one block")
}

/// Upper bound on the optimal margin read from a dual iterate of the
/// augmented problem, once its dual residual is at most `feas_tol`. The
/// residual is charged against the size of the current point, since the
/// weak-duality gap picks up `residual · |y|` from an inexact dual.
fn dual_margin_bound(view: &IterateView<'_>, feas_tol: &BigScalar) -> Option<BigScalar> {
    if *view.dual_residual > *feas_tol {
        return None;
    }
    let prec = view.dual_obj.prec();
    let size = view
        .y
        .iter()
        .map(Scalar::abs)
        .fold(BigScalar::one(prec), BigScalar::max);
    let charge = view.dual_residual.clone() * size.mul_i64(view.y.len() as i64 + 1);
    Some(-view.dual_obj.clone() + charge)
}

/// Result of [`sdp_max_margin`].
#[derive(Clone, Debug)]
pub struct MaxMargin {
    pub status: SdpStatus,
    /// Final point (original variables only).
    pub y: Vec<BigScalar>,
    /// Verified smallest-eigenvalue bound of the blocks at `y`.
    pub margin: BigScalar,
    /// Smallest certified upper bound on the optimal margin, when the dual
    /// iterates became feasible.
    pub upper: Option<BigScalar>,
    pub diagnostics: String,
}

/// Runs the margin maximization of [`sdp_feasibility`] to completion instead
/// of stopping at the first decisive iterate, which yields a well-centred
/// point when the feasible set has interior.
pub fn sdp_max_margin(p: &SdpProblem, params: &SolverParams) -> Result<MaxMargin, SdpError> {
    params.validate()?;
    p.validate()?;
    let prec = params.precision;
    let n = p.num_vars;
    let aug = augment(p, prec);
    let feas_tol = params.feas_tol_big();
    let mut upper: Option<BigScalar> = None;
    let sol = sdp_solve_monitored(&aug, params, |view| {
        if let Some(u) = dual_margin_bound(view, &feas_tol) {
            if upper.as_ref().is_none_or(|b| u < *b) {
                upper = Some(u);
            }
        }
        MonitorAction::Continue
    })?;
    let y = sol.y[..n].to_vec();
    let margin = min_block_margin(p, &y);
    Ok(MaxMargin {
        status: sol.status,
        y,
        margin,
        upper,
        diagnostics: sol.diagnostics,
    })
}

/// Decides whether the blocks of `p` can be made PSD (objective ignored) by
/// maximizing the common eigenvalue margin `λ` subject to `B_k(y) ⪰ λI`,
/// `λ ≤ 1` and the equalities.
pub fn sdp_feasibility(p: &SdpProblem, params: &SolverParams) -> Result<Feasibility, SdpError> {
    params.validate()?;
    p.validate()?;
    let prec = params.precision;
    let n = p.num_vars;
    let lam = n;
    let aug = augment(p, prec);

    let feas_tol = params.feas_tol_big();
    let tiny = BigScalar::pow2(-(prec as i32) / 2, prec);
    let mut verdict: Option<Feasibility> = None;
    let mut best_lower = BigScalar::from_i64(-1, prec) * BigScalar::pow2(prec as i32, prec);
    let mut best_upper = BigScalar::one(prec);

    let judge = |view: &IterateView<'_>,
                     best_lower: &mut BigScalar,
                     best_upper: &mut BigScalar|
     -> Option<Feasibility> {
        let y = &view.y[..n];
        if view.y[lam] >= feas_tol && p.equality_residual(y) <= tiny {
            let margin = min_block_margin(p, y);
            if margin > *best_lower {
                *best_lower = margin.clone();
            }
            if margin >= feas_tol {
                return Some(Feasibility::Feasible {
                    margin,
                    y: y.to_vec(),
                });
            }
        }
        if let Some(upper) = dual_margin_bound(view, &feas_tol) {
            if upper < *best_upper {
                *best_upper = upper.clone();
            }
            if upper <= -feas_tol.clone() {
                return Some(Feasibility::Infeasible { margin: -upper });
            }
        }
        None
    };

    let sol = sdp_solve_monitored(&aug, params, |view| {
        match judge(view, &mut best_lower, &mut best_upper) {
            Some(v) => {
                verdict = Some(v);
                MonitorAction::Stop
            }
            None => MonitorAction::Continue,
        }
    })?;
    if let Some(v) = verdict {
        return Ok(v);
    }
    let reason = format!(
        "margin bracketed by [{}, {}] when the solver stopped ({}: {})",
        best_lower.to_sci(4),
        best_upper.to_sci(4),
        sol.status,
        sol.diagnostics
    );
    Ok(Feasibility::Undecided {
        lower: best_lower,
        upper: best_upper,
        reason,
    })
}
