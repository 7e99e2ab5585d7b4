//! Block-diagonal SDPs over linear matrix inequalities and a primal-dual
//! interior-point solver running at arbitrary precision.
//!
//! The user-facing form is
//!
//! ```text
//! minimize c·y  s.t.  B_k(y) = F_k0 + Σ_i y_i F_ki ⪰ 0,   a_j·y = b_j
//! ```

mod feasibility;
mod io;
mod ipm;

use std::collections::BTreeMap;

pub use feasibility::{sdp_feasibility, sdp_max_margin, Feasibility, MaxMargin};
pub use io::{from_json, to_json, to_sdpa};
pub use ipm::{sdp_solve, sdp_solve_monitored, IterateView, MonitorAction};

use crate::error::SdpError;
use crate::linalg::Matrix;
use crate::scalar::{BigScalar, Scalar, DEFAULT_PREC};

/// One affine matrix map `F_0 + Σ y_i F_i`, stored sparsely over variables.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineBlock {
    dim: usize,
    constant: Matrix<BigScalar>,
    terms: BTreeMap<usize, Matrix<BigScalar>>,
}

impl AffineBlock {
    pub fn new(dim: usize, prec: u32) -> Self {
        AffineBlock {
            dim,
            constant: Matrix::zeros(dim, dim, prec),
            terms: BTreeMap::new(),
        }
    }

    pub fn from_parts(
        constant: Matrix<BigScalar>,
        terms: impl IntoIterator<Item = (usize, Matrix<BigScalar>)>,
    ) -> Self {
        let dim = constant.rows();
        AffineBlock {
            dim,
            constant,
            terms: terms.into_iter().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant(&self) -> &Matrix<BigScalar> {
        &self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &Matrix<BigScalar>)> {
        self.terms.iter().map(|(&k, m)| (k, m))
    }

    pub fn coefficient(&self, var: usize) -> Option<&Matrix<BigScalar>> {
        self.terms.get(&var)
    }

    fn prec(&self) -> u32 {
        self.constant.prec()
    }

    fn add_sym(m: &mut Matrix<BigScalar>, i: usize, j: usize, v: &BigScalar) {
        m[(i, j)] += v;
        if i != j {
            m[(j, i)] += v;
        }
    }

    /// Adds `v` at `(i,j)` and `(j,i)` of the constant term.
    pub fn add_constant(&mut self, i: usize, j: usize, v: &BigScalar) {
        Self::add_sym(&mut self.constant, i, j, v);
    }

    /// Adds `v` at `(i,j)` and `(j,i)` of the coefficient of `y_var`.
    pub fn add_coeff(&mut self, var: usize, i: usize, j: usize, v: &BigScalar) {
        let (dim, p) = (self.dim, self.prec());
        let m = self
            .terms
            .entry(var)
            .or_insert_with(|| Matrix::zeros(dim, dim, p));
        Self::add_sym(m, i, j, v);
    }

    pub fn evaluate(&self, y: &[BigScalar]) -> Matrix<BigScalar> {
        let mut out = self.constant.clone();
        for (&k, m) in &self.terms {
            out.axpy(&y[k], m);
        }
        out
    }

    /// The block `T B(y) Tᵀ`.
    pub fn congruence(&self, t: &Matrix<BigScalar>) -> Self {
        let tt = t.transpose();
        let f = |m: &Matrix<BigScalar>| t.mul(m).mul(&tt).symmetrize();
        AffineBlock {
            dim: t.rows(),
            constant: f(&self.constant),
            terms: self.terms.iter().map(|(&k, m)| (k, f(m))).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearEquality {
    pub coeffs: Vec<(usize, BigScalar)>,
    pub rhs: BigScalar,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    pub num_vars: usize,
    pub objective: Vec<BigScalar>,
    pub blocks: Vec<AffineBlock>,
    pub equalities: Vec<LinearEquality>,
}

impl SdpProblem {
    pub fn new(num_vars: usize, prec: u32) -> Self {
        SdpProblem {
            num_vars,
            objective: vec![BigScalar::zero(prec); num_vars],
            blocks: Vec::new(),
            equalities: Vec::new(),
        }
    }

    pub fn prec(&self) -> u32 {
        self.objective
            .iter()
            .map(BigScalar::prec)
            .chain(self.blocks.iter().map(AffineBlock::prec))
            .max()
            .unwrap_or(DEFAULT_PREC)
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        if self.num_vars == 0 {
            return Err(SdpError::InvalidProblem("no variables".into()));
        }
        if self.blocks.is_empty() {
            return Err(SdpError::InvalidProblem("no blocks".into()));
        }
        if self.objective.len() != self.num_vars {
            return Err(SdpError::InvalidProblem(format!(
                "objective has {} entries for {} variables",
                self.objective.len(),
                self.num_vars
            )));
        }
        for (k, b) in self.blocks.iter().enumerate() {
            if b.dim == 0 {
                return Err(SdpError::InvalidProblem(format!("block {k} is empty")));
            }
            let mats = std::iter::once(&b.constant).chain(b.terms.values());
            for m in mats {
                if m.rows() != b.dim || m.cols() != b.dim || !m.is_symmetric() {
                    return Err(SdpError::InvalidProblem(format!(
                        "block {k} has a non-symmetric or mis-sized coefficient"
                    )));
                }
            }
            if let Some((&v, _)) = b.terms.iter().next_back() {
                if v >= self.num_vars {
                    return Err(SdpError::InvalidProblem(format!(
                        "block {k} refers to variable {v}"
                    )));
                }
            }
        }
        for (j, e) in self.equalities.iter().enumerate() {
            if e.coeffs.iter().any(|&(v, _)| v >= self.num_vars) {
                return Err(SdpError::InvalidProblem(format!(
                    "equality {j} refers to a missing variable"
                )));
            }
        }
        Ok(())
    }

    /// Evaluates every block at `y`.
    pub fn evaluate_blocks(&self, y: &[BigScalar]) -> Vec<Matrix<BigScalar>> {
        self.blocks.iter().map(|b| b.evaluate(y)).collect()
    }

    /// Largest violation `|a·y − b|` over the equalities.
    pub fn equality_residual(&self, y: &[BigScalar]) -> BigScalar {
        let p = self.prec();
        self.equalities
            .iter()
            .map(|e| {
                let lhs = e
                    .coeffs
                    .iter()
                    .fold(BigScalar::zero(p), |acc, (v, c)| acc + &(c * &y[*v]));
                (lhs - &e.rhs).abs()
            })
            .fold(BigScalar::zero(p), BigScalar::max)
    }

    pub fn objective_value(&self, y: &[BigScalar]) -> BigScalar {
        let p = self.prec();
        self.objective
            .iter()
            .zip(y)
            .fold(BigScalar::zero(p), |acc, (c, v)| acc + &(c * v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum SdpStatus {
    Optimal,
    /// The constraints admit no `y`.
    PrimalInfeasible,
    /// The objective is unbounded below on the feasible set.
    DualInfeasible,
    Undecided,
}

impl std::fmt::Display for SdpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

/// Evidence attached to an infeasibility verdict.
#[derive(Clone, Debug, PartialEq)]
pub enum RayCertificate {
    /// PSD matrices `W_k` and equality multipliers `μ` with
    /// `Σ_k ⟨F_ki, W_k⟩ = Σ_j μ_j a_ji` for every `i` and
    /// `Σ_k ⟨F_k0, W_k⟩ + Σ_j μ_j b_j = −margin`: no `y` can satisfy the
    /// constraints.
    Farkas {
        block_weights: Vec<Matrix<BigScalar>>,
        equality_weights: Vec<BigScalar>,
        margin: BigScalar,
    },
    /// A direction `d` along which every block stays PSD and the
    /// equalities hold while `c·d = −margin`.
    ImprovingRay {
        direction: Vec<BigScalar>,
        margin: BigScalar,
    },
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub y: Vec<BigScalar>,
    pub block_duals: Vec<Matrix<BigScalar>>,
    pub equality_duals: Vec<BigScalar>,
    pub primal_obj: BigScalar,
    pub dual_obj: BigScalar,
    pub gap: BigScalar,
    pub status: SdpStatus,
    pub iterations: usize,
    pub certificate: Option<RayCertificate>,
    pub diagnostics: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverParams {
    pub precision: u32,
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iters: usize,
    pub step_fraction: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            precision: DEFAULT_PREC,
            gap_tol: 1e-25,
            feas_tol: 1e-25,
            max_iters: 500,
            step_fraction: 0.98,
        }
    }
}

impl SolverParams {
    pub fn with_precision(precision: u32) -> Self {
        SolverParams {
            precision,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        let bad = |m: &str| Err(SdpError::InvalidParams(m.into()));
        if self.precision < 53 {
            return bad("precision must be at least 53 bits");
        }
        if !(self.gap_tol > 0.0 && self.gap_tol.is_finite()) {
            return bad("gap_tol must be positive");
        }
        if !(self.feas_tol > 0.0 && self.feas_tol.is_finite()) {
            return bad("feas_tol must be positive");
        }
        if !(self.step_fraction > 0.0 && self.step_fraction < 1.0) {
            return bad("step_fraction must lie in (0,1)");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        Ok(())
    }

    pub fn gap_tol_big(&self) -> BigScalar {
        BigScalar::from_f64(self.gap_tol, self.precision)
    }

    pub fn feas_tol_big(&self) -> BigScalar {
        BigScalar::from_f64(self.feas_tol, self.precision)
    }
}

/// Convenience for building problems from small integer data in tests and
/// examples.
pub fn int_matrix(rows: &[&[i64]], prec: u32) -> Matrix<BigScalar> {
    Matrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&v| BigScalar::from_i64(v, prec)).collect())
            .collect(),
    )
}
