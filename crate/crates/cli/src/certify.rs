use serde_json::{json, Value};
use sos_staircase::certificates::{
    cert_to_json, complete_certificate, complete_certificate_with_value, extract_certificate,
    paulynomial, rationalize_certificate, verify_certificate, verify_ineq, SosDecomposition,
};
use sos_staircase::error::CertError;
use sos_staircase::relaxation::{solve_sos, true_value, ParamPop, Variant};
use sos_staircase::sdp::{Feasibility, SolverParams};
use sos_staircase::staircase::{exactness_feasible, ExactnessSystem};
use sos_staircase::{BigScalar, Scalar, UniPoly};

use crate::args::{parse_epsilon, parse_orders, CertifyArgs};
use crate::output::{emit, json_text};
use crate::{ConfigError, Status};

/// A failed certification with a stable reason string.
#[derive(Debug)]
pub struct Failure {
    pub reason: &'static str,
    pub detail: String,
}

fn fail(reason: &'static str, detail: impl Into<String>) -> Failure {
    Failure {
        reason,
        detail: detail.into(),
    }
}

fn from_cert(e: CertError) -> Failure {
    let reason = match &e {
        CertError::Infeasible(_) => "exactness infeasible",
        CertError::VerificationFailed(_) => "verification failed",
        CertError::RoundingFailed(_) => "rounding failed",
        CertError::Undecided(_) => "undecided",
        CertError::InvalidInput(_) | CertError::Poly(_) => "invalid input",
        CertError::Sdp(_) | CertError::Relaxation(_) => "solver failed",
    };
    fail(reason, e.to_string())
}

fn single_order(a: &CertifyArgs) -> Result<Option<usize>, ConfigError> {
    match &a.orders {
        None => Ok(None),
        Some(s) => match parse_orders(s)?.as_slice() {
            [d] => Ok(Some(*d)),
            _ => Err(ConfigError("certify takes a single order".into())),
        },
    }
}

/// Paulynomial multiplier, checked on the interval, completed at order `d`
/// (default: one above its degree parameter). At ε = 0 the optimum is −1 and
/// the constant multiplier 1 completes at order 1.
fn via_paulynomial(
    eps: &BigScalar,
    order: Option<usize>,
    params: &SolverParams,
) -> Result<SosDecomposition<BigScalar>, Failure> {
    let prec = params.precision;
    if eps.is_zero() {
        let one = UniPoly::constant(BigScalar::one(prec));
        let v = BigScalar::from_i64(-1, prec);
        return complete_certificate_with_value(&one, eps, order.unwrap_or(1), &v, params)
            .map_err(from_cert);
    }
    let (dp, s) = paulynomial(eps, &BigScalar::one(prec)).map_err(from_cert)?;
    let samples = 4 * (s.degree().max(0) as usize + 2);
    let ineq = verify_ineq(&s, eps, samples, &params.feas_tol_big()).map_err(from_cert)?;
    if !ineq.holds() {
        return Err(fail(
            "verification failed",
            format!("multiplier inequality: {ineq:?}"),
        ));
    }
    complete_certificate(&s, eps, order.unwrap_or(dp + 1), params).map_err(from_cert)
}

/// Extracts the Grams of the order-`d` SOS solve. When the extracted Grams
/// do not verify, the exactness system's interior solution completes the
/// certificate instead.
fn via_solve(
    eps: &BigScalar,
    d: usize,
    params: &SolverParams,
) -> Result<SosDecomposition<BigScalar>, Failure> {
    let vstar = true_value(eps).map_err(|e| fail("invalid input", e.to_string()))?;
    let verdict = if eps.is_zero() {
        None
    } else {
        let v =
            exactness_feasible(eps, d, params).map_err(|e| fail("solver failed", e.to_string()))?;
        if let Feasibility::Infeasible { margin } = &v {
            return Err(fail(
                "exactness infeasible",
                format!(
                    "no order-{d} certificate of x >= 0; infeasibility margin {}",
                    margin.to_sci(6)
                ),
            ));
        }
        Some(v)
    };
    let pop = ParamPop::new(eps.clone(), Variant::Univariate4)
        .map_err(|e| fail("invalid input", e.to_string()))?;
    let (relax, sol) =
        solve_sos(&pop, d, params).map_err(|e| fail("solver failed", e.to_string()))?;
    let value = sol.y[relax.v_index].clone();
    let slack = params
        .gap_tol_big()
        .mul_i64(1000)
        .max(BigScalar::pow10(-15, params.precision));
    if value < &vstar - &slack {
        return Err(fail(
            "exactness infeasible",
            format!(
                "order-{d} value {} is below the optimum {}",
                value.to_sci(12),
                vstar.to_sci(12)
            ),
        ));
    }
    match extract_certificate(&relax, &sol, eps) {
        Ok(c) => Ok(c),
        Err(CertError::VerificationFailed(why)) => match verdict {
            Some(Feasibility::Feasible { y, .. }) => {
                let sys = ExactnessSystem::new(eps, d, params.precision);
                Ok(sys.certificate(&y).to_full())
            }
            _ => Err(fail("verification failed", why)),
        },
        Err(e) => Err(from_cert(e)),
    }
}

pub fn run(a: &CertifyArgs) -> Result<Status, ConfigError> {
    let params = a.common.solver()?;
    let eps = parse_epsilon(&a.epsilon, params.precision)?;
    let order = single_order(a)?;
    if a.denom_bound == 0 {
        return Err(ConfigError("--denom-bound must be positive".into()));
    }
    let d = match (order, a.paulynomial) {
        (Some(d), _) => Some(d),
        (None, true) => None,
        (None, false) => {
            return Err(ConfigError(
                "certify needs --orders unless --paulynomial is given".into(),
            ))
        }
    };

    let built = if a.paulynomial {
        via_paulynomial(&eps, d, &params)
    } else {
        via_solve(&eps, d.expect("order checked above"), &params)
    };
    let result = built.and_then(|c| {
        let ver = verify_certificate(&c);
        if !ver.passes() {
            return Err(fail(
                "verification failed",
                format!(
                    "residual {} and Gram eigenvalue bound {}",
                    ver.residual.to_sci(6),
                    ver.min_gram_eig.to_sci(6)
                ),
            ));
        }
        eprintln!(
            "verified order-{} certificate: residual {}, Gram eigenvalue bound {}",
            c.order(),
            ver.residual.to_sci(6),
            ver.min_gram_eig.to_sci(6)
        );
        if !a.rationalize {
            return Ok(cert_to_json(&c));
        }
        let exact = rationalize_certificate(&c, a.denom_bound).map_err(from_cert)?;
        let ver = verify_certificate(&exact);
        if !(ver.residual.is_zero() && ver.exact_psd == Some(true)) {
            return Err(fail(
                "verification failed",
                "rational certificate does not verify exactly",
            ));
        }
        eprintln!("rational certificate verified exactly");
        Ok(cert_to_json(&exact))
    });

    match result {
        Ok(doc) => {
            match &a.common.out {
                Some(path) => {
                    emit(Some(path), &json_text(&doc))?;
                    emit(
                        None,
                        &json_text(
                            &json!({"status": "verified", "out": path.display().to_string()}),
                        ),
                    )?;
                }
                None => emit(None, &json_text(&doc))?,
            }
            Ok(Status::Ok)
        }
        Err(f) => {
            eprintln!("certification failed: {}: {}", f.reason, f.detail);
            let doc: Value = json!({
                "status": "failed",
                "reason": f.reason,
                "detail": f.detail,
                "epsilon": a.epsilon,
                "order": d,
            });
            emit(None, &json_text(&doc))?;
            Ok(Status::VerificationFailed)
        }
    }
}
