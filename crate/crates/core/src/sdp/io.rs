//! `sdp-v1` JSON documents and a sparse SDPA text dump.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::error::SdpError;
use crate::linalg::Matrix;
use crate::scalar::{BigScalar, Scalar};

use super::{AffineBlock, LinearEquality, SdpProblem};

pub const SCHEMA: &str = "sdp-v1";

fn upper_entries(m: &Matrix<BigScalar>) -> Vec<Value> {
    let mut out = Vec::new();
    for i in 0..m.rows() {
        for j in i..m.cols() {
            if !m[(i, j)].is_zero() {
                out.push(json!([i, j, m[(i, j)].to_exact_string()]));
            }
        }
    }
    out
}

pub fn to_json(p: &SdpProblem) -> Value {
    let blocks: Vec<Value> = p
        .blocks
        .iter()
        .map(|b| {
            let terms: Vec<Value> = b
                .terms()
                .map(|(k, m)| json!({"var": k, "entries": upper_entries(m)}))
                .collect();
            json!({
                "dim": b.dim(),
                "constant": upper_entries(b.constant()),
                "terms": terms,
            })
        })
        .collect();
    let equalities: Vec<Value> = p
        .equalities
        .iter()
        .map(|e| {
            json!({
                "coeffs": e.coeffs.iter().map(|(v, c)| json!([v, c.to_exact_string()])).collect::<Vec<_>>(),
                "rhs": e.rhs.to_exact_string(),
            })
        })
        .collect();
    json!({
        "schema": SCHEMA,
        "precision": p.prec(),
        "num_vars": p.num_vars,
        "objective": p.objective.iter().map(|c| c.to_exact_string()).collect::<Vec<_>>(),
        "blocks": blocks,
        "equalities": equalities,
    })
}

fn fmt_err(m: impl Into<String>) -> SdpError {
    SdpError::Format(m.into())
}

fn get_usize(v: &Value, key: &str) -> Result<usize, SdpError> {
    v.get(key)
        .and_then(Value::as_u64)
        .map(|x| x as usize)
        .ok_or_else(|| fmt_err(format!("missing integer field {key:?}")))
}

fn parse_scalar(v: &Value, prec: u32) -> Result<BigScalar, SdpError> {
    let s = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => return Err(fmt_err(format!("expected a scalar, got {other}"))),
    };
    BigScalar::parse(&s, prec).map_err(|e| fmt_err(e.to_string()))
}

fn fill_entries(m: &mut AffineBlock, var: Option<usize>, entries: &Value, prec: u32) -> Result<(), SdpError> {
    let arr = entries
        .as_array()
        .ok_or_else(|| fmt_err("entries must be an array"))?;
    for e in arr {
        let t = e
            .as_array()
            .filter(|t| t.len() == 3)
            .ok_or_else(|| fmt_err("entry must be [i, j, value]"))?;
        let i = t[0].as_u64().ok_or_else(|| fmt_err("bad row index"))? as usize;
        let j = t[1].as_u64().ok_or_else(|| fmt_err("bad column index"))? as usize;
        if i >= m.dim() || j >= m.dim() {
            return Err(fmt_err(format!("entry ({i},{j}) outside the block")));
        }
        let v = parse_scalar(&t[2], prec)?;
        match var {
            None => m.add_constant(i, j, &v),
            Some(k) => m.add_coeff(k, i, j, &v),
        }
    }
    Ok(())
}

/// Reads an `sdp-v1` document. `prec` overrides the stored precision.
pub fn from_json(v: &Value, prec: Option<u32>) -> Result<SdpProblem, SdpError> {
    if v.get("schema").and_then(Value::as_str) != Some(SCHEMA) {
        return Err(fmt_err(format!("schema must be {SCHEMA:?}")));
    }
    let prec = match prec {
        Some(p) => p,
        None => get_usize(v, "precision")? as u32,
    };
    let n = get_usize(v, "num_vars")?;
    let mut p = SdpProblem::new(n, prec);
    let obj = v
        .get("objective")
        .and_then(Value::as_array)
        .ok_or_else(|| fmt_err("missing objective"))?;
    p.objective = obj
        .iter()
        .map(|c| parse_scalar(c, prec))
        .collect::<Result<_, _>>()?;
    for b in v
        .get("blocks")
        .and_then(Value::as_array)
        .ok_or_else(|| fmt_err("missing blocks"))?
    {
        let dim = get_usize(b, "dim")?;
        let mut blk = AffineBlock::new(dim, prec);
        if let Some(c) = b.get("constant") {
            fill_entries(&mut blk, None, c, prec)?;
        }
        for t in b.get("terms").and_then(Value::as_array).into_iter().flatten() {
            let k = get_usize(t, "var")?;
            let entries = t.get("entries").ok_or_else(|| fmt_err("term without entries"))?;
            fill_entries(&mut blk, Some(k), entries, prec)?;
        }
        p.blocks.push(blk);
    }
    for e in v
        .get("equalities")
        .and_then(Value::as_array)
        .into_iter()
        .flatten()
    {
        let coeffs = e
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| fmt_err("equality without coeffs"))?
            .iter()
            .map(|c| {
                let t = c.as_array().filter(|t| t.len() == 2).ok_or_else(|| fmt_err("coeff must be [var, value]"))?;
                let k = t[0].as_u64().ok_or_else(|| fmt_err("bad variable index"))? as usize;
                Ok((k, parse_scalar(&t[1], prec)?))
            })
            .collect::<Result<Vec<_>, SdpError>>()?;
        let rhs = parse_scalar(e.get("rhs").ok_or_else(|| fmt_err("equality without rhs"))?, prec)?;
        p.equalities.push(LinearEquality { coeffs, rhs });
    }
    p.validate()?;
    Ok(p)
}

/// Sparse SDPA text (`min c·y` s.t. `Σ y_i F_i − F_0 ⪰ 0`). Each equality
/// becomes a pair of opposite diagonal entries in a trailing LP block.
pub fn to_sdpa(p: &SdpProblem) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "\"sdp-v1 export: {} variables", p.num_vars);
    let _ = writeln!(s, "{}", p.num_vars);
    let lp = 2 * p.equalities.len();
    let nblocks = p.blocks.len() + usize::from(lp > 0);
    let _ = writeln!(s, "{nblocks}");
    let mut sizes: Vec<String> = p.blocks.iter().map(|b| b.dim().to_string()).collect();
    if lp > 0 {
        sizes.push(format!("-{lp}"));
    }
    let _ = writeln!(s, "{}", sizes.join(" "));
    let _ = writeln!(
        s,
        "{}",
        p.objective.iter().map(|c| c.to_sci(40)).collect::<Vec<_>>().join(" ")
    );
    let mut emit = |mat: usize, blk: usize, m: &Matrix<BigScalar>, negate: bool| {
        for i in 0..m.rows() {
            for j in i..m.cols() {
                let v = &m[(i, j)];
                if v.is_zero() {
                    continue;
                }
                let v = if negate { -v.clone() } else { v.clone() };
                let _ = writeln!(s, "{mat} {blk} {} {} {}", i + 1, j + 1, v.to_sci(40));
            }
        }
    };
    for (k, b) in p.blocks.iter().enumerate() {
        emit(0, k + 1, b.constant(), true);
        for (var, m) in b.terms() {
            emit(var + 1, k + 1, m, false);
        }
    }
    if lp > 0 {
        let blk = p.blocks.len() + 1;
        for (j, e) in p.equalities.iter().enumerate() {
            let (r1, r2) = (2 * j + 1, 2 * j + 2);
            if !e.rhs.is_zero() {
                let _ = writeln!(s, "0 {blk} {r1} {r1} {}", e.rhs.to_sci(40));
                let _ = writeln!(s, "0 {blk} {r2} {r2} {}", (-e.rhs.clone()).to_sci(40));
            }
            for (v, c) in &e.coeffs {
                let _ = writeln!(s, "{} {blk} {r1} {r1} {}", v + 1, c.to_sci(40));
                let _ = writeln!(s, "{} {blk} {r2} {r2} {}", v + 1, (-c.clone()).to_sci(40));
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::int_matrix;

    fn sample() -> SdpProblem {
        let p0 = 128;
        let mut p = SdpProblem::new(2, p0);
        p.objective = vec![BigScalar::ratio(1, 3, p0), BigScalar::zero(p0)];
        p.blocks.push(AffineBlock::from_parts(
            int_matrix(&[&[1, 0], &[0, 2]], p0),
            [(0, int_matrix(&[&[0, 1], &[1, 0]], p0)), (1, int_matrix(&[&[0, 0], &[0, 1]], p0))],
        ));
        p.equalities.push(LinearEquality {
            coeffs: vec![(1, BigScalar::one(p0))],
            rhs: BigScalar::ratio(1, 10, p0),
        });
        p
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let p = sample();
        let doc = to_json(&p);
        let back = from_json(&doc, None).unwrap();
        assert_eq!(back, p);
        assert_eq!(to_json(&back), doc);
    }

    #[test]
    fn rejects_wrong_schema() {
        let mut doc = to_json(&sample());
        doc["schema"] = json!("sdp-v0");
        assert!(from_json(&doc, None).is_err());
    }

    #[test]
    fn sdpa_header() {
        let text = to_sdpa(&sample());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "2");
        assert_eq!(lines[2], "2");
        assert_eq!(lines[3], "2 -2");
        assert!(lines.iter().any(|l| l.starts_with("1 1 1 2 ")));
    }
}
