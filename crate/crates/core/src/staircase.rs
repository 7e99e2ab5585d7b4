//! Exactness thresholds `ε_d`: the smallest ε for which `x` lies in the
//! truncated quadratic module of order `d`, located by monotone bisection.

use std::time::Instant;

use serde::Serialize;

use crate::bipoly::BiPoly;
use crate::certificates::{GramCertificate, ReducedDecomposition};
use crate::error::StaircaseError;
use crate::gram::{univariate_basis, SosSystem};
use crate::scalar::{BigScalar, Scalar};
use crate::sdp::{sdp_feasibility, Feasibility, SdpProblem, SolverParams};

/// Precision cap for escalation on undecided points.
pub const MAX_PREC: u32 = 2048;

/// The module-membership system `x = q̃x² + r̃x²(1−x²) + s·g_ε` with Gram
/// bases of sizes `d`, `d−1`, `d`.
pub struct ExactnessSystem {
    pub system: SosSystem,
    pub problem: SdpProblem,
    pub epsilon: BigScalar,
}

impl ExactnessSystem {
    pub fn new(eps: &BigScalar, d: usize, prec: u32) -> Self {
        assert!(d >= 1, "order must be at least 1");
        let eps = eps.with_prec(prec);
        let one = BigScalar::one(prec);
        let x2 = BiPoly::from_terms([((2, 0), one.clone())]);
        let x2_circle = BiPoly::from_terms([((2, 0), one.clone()), ((4, 0), -one.clone())]);
        let g = BiPoly::from_terms([((1, 0), one.clone()), ((2, 0), &one - &eps)]);
        let mut system = SosSystem::new(BiPoly::var(0, &one), prec);
        system.add_gram(univariate_basis(d - 1), x2);
        let r_basis = if d >= 2 { univariate_basis(d - 2) } else { Vec::new() };
        system.add_gram(r_basis, x2_circle);
        system.add_gram(univariate_basis(d - 1), g);
        let problem = system.to_problem();
        ExactnessSystem {
            system,
            problem,
            epsilon: eps,
        }
    }

    /// The reduced certificate encoded by a solution vector.
    pub fn certificate(&self, y: &[BigScalar]) -> ReducedDecomposition<BigScalar> {
        let gram = |k: usize| {
            let g = self.system.gram(k);
            if g.dim() == 0 {
                GramCertificate::empty(&self.epsilon)
            } else {
                GramCertificate::new(g.matrix(y))
            }
        };
        ReducedDecomposition {
            epsilon: self.epsilon.clone(),
            q_tilde: gram(0),
            r_tilde: gram(1),
            s: gram(2),
        }
    }
}

/// Decides whether the order-`d` relaxation is exact at `ε`, i.e. whether `x`
/// belongs to the truncated quadratic module.
pub fn exactness_feasible(eps: &BigScalar, d: usize, params: &SolverParams) -> Result<Feasibility, StaircaseError> {
    if d == 0 {
        return Err(StaircaseError::OrderTooLow);
    }
    if !(eps.signum_i() >= 0 && *eps <= BigScalar::one(eps.prec())) {
        return Err(StaircaseError::Domain(format!("epsilon {} outside [0,1]", eps.to_sci(6))));
    }
    let sys = ExactnessSystem::new(eps, d, params.precision);
    Ok(sdp_feasibility(&sys.problem, params)?)
}

/// Like [`exactness_feasible`], but doubles the precision on `Undecided`
/// up to [`MAX_PREC`]. Returns the verdict and the last precision used.
pub fn exactness_escalating(
    eps: &BigScalar,
    d: usize,
    params: &SolverParams,
) -> Result<(Feasibility, u32), StaircaseError> {
    let mut p = params.clone();
    loop {
        let verdict = exactness_feasible(eps, d, &p)?;
        if !matches!(verdict, Feasibility::Undecided { .. }) || p.precision >= MAX_PREC {
            return Ok((verdict, p.precision));
        }
        p.precision = (p.precision * 2).min(MAX_PREC);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EndpointStatus {
    Feasible,
    Infeasible,
    TheoreticalBound,
    /// Closed-form value established analytically rather than by a solve.
    Derived,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evidence {
    pub lo_status: EndpointStatus,
    pub hi_status: EndpointStatus,
    /// Precision of every decision made, in order.
    pub precisions: Vec<u32>,
    /// A midpoint that stayed undecided at the precision cap, which stopped
    /// the bisection before the target width.
    pub unresolved: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Enclosure {
    pub lo: BigScalar,
    pub hi: BigScalar,
    pub evidence: Evidence,
}

impl Enclosure {
    pub fn width(&self) -> BigScalar {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigScalar) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    /// Geometric midpoint (the arithmetic one when `lo = 0`).
    pub fn center(&self) -> BigScalar {
        if self.lo.signum_i() > 0 {
            (&self.lo * &self.hi).sqrt()
        } else {
            (&self.lo + &self.hi).div_i64(2)
        }
    }

    pub fn max_precision(&self) -> u32 {
        self.evidence.precisions.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Width {
    Absolute(BigScalar),
    /// Stop once `hi − lo ≤ f·hi`.
    Relative(BigScalar),
}

impl Width {
    fn reached(&self, lo: &BigScalar, hi: &BigScalar) -> bool {
        let w = hi.clone() - lo;
        match self {
            Width::Absolute(t) => w <= *t,
            Width::Relative(f) => w <= f.clone() * hi,
        }
    }
}

/// `(1/(1+2d(4e)^{2d}), 4^{−d})`, the bounds on the threshold of order `d+1`.
pub fn theoretical_bounds(d: usize, prec: u32) -> (BigScalar, BigScalar) {
    let (_, eval) = crate::certificates::markov_bound(d, prec);
    let lower = eval.recip();
    let upper = BigScalar::pow2(-2 * d as i32, prec);
    (lower, upper)
}

pub fn epsilon_threshold(d: usize, target_width: &BigScalar, params: &SolverParams) -> Result<Enclosure, StaircaseError> {
    if target_width.signum_i() <= 0 {
        return Err(StaircaseError::BadTarget);
    }
    epsilon_threshold_with(d, &Width::Absolute(target_width.clone()), params)
}

pub fn epsilon_threshold_with(d: usize, width: &Width, params: &SolverParams) -> Result<Enclosure, StaircaseError> {
    let prec = params.precision;
    match d {
        0 => return Err(StaircaseError::OrderTooLow),
        1 => {
            let one = BigScalar::one(prec);
            return Ok(Enclosure {
                lo: one.clone(),
                hi: one,
                evidence: Evidence {
                    lo_status: EndpointStatus::Derived,
                    hi_status: EndpointStatus::Derived,
                    precisions: Vec::new(),
                    unresolved: None,
                },
            });
        }
        _ => {}
    }
    match width {
        Width::Absolute(t) | Width::Relative(t) if t.signum_i() <= 0 => return Err(StaircaseError::BadTarget),
        _ => {}
    }
    let (mut lo, mut hi) = theoretical_bounds(d - 1, prec);
    let mut precisions = Vec::new();

    let (top, p) = exactness_escalating(&hi, d, params)?;
    precisions.push(p);
    if !top.is_feasible() {
        return Err(StaircaseError::BracketFailure {
            hi: hi.to_sci(10),
            reason: format!("expected Feasible, got {}", top.label()),
        });
    }
    let mut lo_status = EndpointStatus::TheoreticalBound;
    let (bottom, p) = exactness_escalating(&lo, d, params)?;
    precisions.push(p);
    match bottom {
        Feasibility::Infeasible { .. } => lo_status = EndpointStatus::Infeasible,
        Feasibility::Feasible { .. } => {
            return Err(StaircaseError::BracketFailure {
                hi: hi.to_sci(10),
                reason: format!("lower bound {} certified Feasible", lo.to_sci(10)),
            })
        }
        Feasibility::Undecided { .. } => {}
    }

    let four = BigScalar::from_i64(4, prec);
    let mut unresolved = None;
    while !width.reached(&lo, &hi) {
        let mid = if lo.signum_i() > 0 && hi.clone() / &lo > four {
            (&lo * &hi).sqrt()
        } else {
            (&lo + &hi).div_i64(2)
        };
        let (verdict, p) = exactness_escalating(&mid, d, params)?;
        precisions.push(p);
        match verdict {
            Feasibility::Feasible { .. } => hi = mid,
            Feasibility::Infeasible { .. } => {
                lo = mid;
                lo_status = EndpointStatus::Infeasible;
            }
            Feasibility::Undecided { reason, .. } => {
                unresolved = Some(format!("{} at {p} bits: {reason}", mid.to_sci(12)));
                break;
            }
        }
    }
    Ok(Enclosure {
        lo,
        hi,
        evidence: Evidence {
            lo_status,
            hi_status: EndpointStatus::Feasible,
            precisions,
            unresolved,
        },
    })
}

/// `1 − √3/2`.
pub fn closed_form_eps2(prec: u32) -> BigScalar {
    BigScalar::one(prec) - BigScalar::from_i64(3, prec).sqrt().div_i64(2)
}

/// `−4ε² + 8ε − 1`, whose smaller root is `ε₂`.
pub fn eps2_discriminant(e: &BigScalar) -> BigScalar {
    let p = e.prec();
    BigScalar::from_i64(-1, p) + e.mul_i64(8) - (e * e).mul_i64(4)
}

/// `64ε⁶ − 384ε⁵ + 944ε⁴ − 1216ε³ + 812ε² − 216ε + 1`.
pub fn eps3_sextic(e: &BigScalar) -> BigScalar {
    let p = e.prec();
    [64, -384, 944, -1216, 812, -216, 1]
        .iter()
        .fold(BigScalar::zero(p), |acc, &c| acc * e + BigScalar::from_i64(c, p))
}

/// `1 − √(3 + 12√10·sin(arctan(3√111)/3 + π/6))/6`, an upper bound on `ε₃`
/// and a root of [`eps3_sextic`].
pub fn closed_form_eps3_upper(prec: u32) -> BigScalar {
    let w = prec + 32;
    let n = |k: i64| BigScalar::from_i64(k, w);
    let angle = (n(3) * n(111).sqrt()).atan().div_i64(3) + BigScalar::pi(w).div_i64(6);
    let inner = n(3) + n(12) * n(10).sqrt() * angle.sin();
    let v = (n(1) - inner.sqrt().div_i64(6)).with_prec(prec);
    let residual = eps3_sextic(&v).abs();
    let bound = BigScalar::from_f64(10f64, prec).powi(-(prec as i32 / 4));
    assert!(residual <= bound, "closed form is not a root of the sextic: {}", residual.to_sci(6));
    v
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FarkasReport {
    pub eta: BigScalar,
    pub v2: BigScalar,
    pub v3: BigScalar,
    pub xi: BigScalar,
    pub u: [BigScalar; 3],
    /// Named checks and whether they held.
    pub checks: Vec<(String, bool)>,
}

impl FarkasReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }
}

fn psd2(a: &BigScalar, b: &BigScalar, c: &BigScalar) -> bool {
    a.signum_i() >= 0 && c.signum_i() >= 0 && (a * c - b * b).signum_i() >= 0
}

/// Witness `u` for the alternative system
/// `[[u₂,u₃],[u₃,u₂]] ⪰ 0`, `[[u₁+ηu₂, u₂+ηu₃],[u₂+ηu₃, ηu₂+u₃]] ⪰ 0`, `u₁ < 0`,
/// whose existence shows the order-2 relaxation is not exact at `ε = 1 − η`.
pub fn farkas_witness(eta: &BigScalar) -> Result<FarkasReport, StaircaseError> {
    let p = eta.prec();
    let one = BigScalar::one(p);
    let half_sqrt3 = BigScalar::from_i64(3, p).sqrt().div_i64(2);
    if !(*eta > half_sqrt3 && *eta < one) {
        return Err(StaircaseError::Domain(format!("eta {} outside (√3/2, 1)", eta.to_sci(8))));
    }
    let eta_p1 = eta + &one;
    let v2_bar = eta * &(&one + &eta.mul_i64(2)) / eta_p1.mul_i64(2);
    let v3_bar = &one - &v2_bar;
    let margin = eta * eta * ((eta * eta).mul_i64(4) - BigScalar::from_i64(3, p)) / eta_p1.mul_i64(32);
    let xi = BigScalar::pow10(-3, p).min(margin);
    let v2 = &v2_bar - &xi;
    let v3 = &v3_bar - &xi;
    let u = [&v2 + &v3 - &one, v2.clone(), -v3.clone()];
    let [u1, u2, u3] = &u;
    let a = u1 + &(eta * u2);
    let b = u2 + &(eta * u3);
    let c = &(eta * u2) + u3;
    let checks = vec![
        ("[[u2,u3],[u3,u2]] psd".to_string(), psd2(u2, u3, u2)),
        ("[[u1+eta*u2, u2+eta*u3],[u2+eta*u3, eta*u2+u3]] psd".to_string(), psd2(&a, &b, &c)),
        ("u1 < 0".to_string(), u1.signum_i() < 0),
    ];
    let report = FarkasReport {
        eta: eta.clone(),
        v2,
        v3,
        xi,
        u,
        checks,
    };
    if !report.passed() {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
        return Err(StaircaseError::WitnessInvalid(failed.join("; ")));
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StaircasePoint {
    pub d: usize,
    pub enclosure: Enclosure,
    pub lower_bound: BigScalar,
    pub upper_bound: BigScalar,
    pub wall_time_ms: u128,
}

impl StaircasePoint {
    pub fn sandwich_holds(&self) -> bool {
        self.lower_bound <= self.enclosure.hi && self.enclosure.lo <= self.upper_bound
    }

    pub fn ln_inv(&self) -> BigScalar {
        -self.enclosure.center().ln()
    }

    pub fn log10_inv_hi(&self) -> BigScalar {
        -self.enclosure.hi.log10()
    }
}

#[derive(Clone, Debug)]
pub struct Sweep {
    pub points: Vec<Result<StaircasePoint, (usize, StaircaseError)>>,
    /// Least-squares slope of `d ↦ ln(1/ε_d)` over the successful points
    /// (at least two needed).
    pub slope: Option<BigScalar>,
}

pub fn least_squares_slope(xs: &[BigScalar], ys: &[BigScalar]) -> Option<BigScalar> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let p = xs[0].prec();
    let n = xs.len() as i64;
    let mx = xs.iter().fold(BigScalar::zero(p), |a, x| a + x).div_i64(n);
    let my = ys.iter().fold(BigScalar::zero(p), |a, y| a + y).div_i64(n);
    let mut sxy = BigScalar::zero(p);
    let mut sxx = BigScalar::zero(p);
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - &mx;
        sxy += &(&dx * &(y - &my));
        sxx += &(&dx * &dx);
    }
    (!sxx.is_zero()).then(|| sxy / sxx)
}

/// Thresholds for every order in `orders`, computed on up to `jobs` threads.
pub fn sweep(orders: &[usize], width: &Width, params: &SolverParams, jobs: usize) -> Sweep {
    let prec = params.precision;
    let run = |d: usize| -> Result<StaircasePoint, (usize, StaircaseError)> {
        let start = Instant::now();
        let enclosure = epsilon_threshold_with(d, width, params).map_err(|e| (d, e))?;
        let (lower_bound, upper_bound) = theoretical_bounds(d.saturating_sub(1), prec);
        Ok(StaircasePoint {
            d,
            enclosure,
            lower_bound,
            upper_bound,
            wall_time_ms: start.elapsed().as_millis(),
        })
    };
    let jobs = jobs.max(1);
    let mut points: Vec<Option<Result<StaircasePoint, (usize, StaircaseError)>>> = vec![None; orders.len()];
    for chunk in (0..orders.len()).collect::<Vec<_>>().chunks(jobs) {
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunk.iter().map(|&i| (i, scope.spawn(move || run(orders[i])))).collect();
            for (i, h) in handles {
                points[i] = Some(h.join().expect("staircase worker panicked"));
            }
        });
    }
    let points: Vec<_> = points.into_iter().map(Option::unwrap).collect();
    let (xs, ys): (Vec<_>, Vec<_>) = points
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .filter(|pt| pt.d >= 2)
        .map(|pt| (BigScalar::from_i64(pt.d as i64, prec), pt.ln_inv()))
        .unzip();
    Sweep {
        slope: least_squares_slope(&xs, &ys),
        points,
    }
}
