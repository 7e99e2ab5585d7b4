use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};
use sos_staircase::certificates::markov_bound;
use sos_staircase::staircase::theoretical_bounds;
use sos_staircase::BigScalar;

use crate::args::{parse_range, parse_scalar, BoundsArgs, Format};
use crate::output::{emit, json_text, Csv};
use crate::{ConfigError, Status};

/// Enclosures `(lo, hi)` by threshold order, read from a staircase CSV.
/// Rows with NA entries are skipped.
pub fn read_enclosures(
    path: &Path,
    prec: u32,
) -> Result<BTreeMap<usize, (BigScalar, BigScalar)>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("reading {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .unwrap_or("")
        .split(',')
        .map(str::trim)
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| ConfigError(format!("{}: missing column {name}", path.display())))
    };
    let (cd, clo, chi) = (col("d")?, col("lo")?, col("hi")?);
    let mut out = BTreeMap::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |i: usize| f.get(i).copied().unwrap_or("NA");
        if [cd, clo, chi].iter().any(|&i| get(i) == "NA") {
            continue;
        }
        let d: usize = get(cd)
            .parse()
            .map_err(|_| ConfigError(format!("{}: bad order {:?}", path.display(), get(cd))))?;
        out.insert(
            d,
            (
                parse_scalar(get(clo), "lo", prec)?,
                parse_scalar(get(chi), "hi", prec)?,
            ),
        );
    }
    Ok(out)
}

pub fn run(a: &BoundsArgs) -> Result<Status, ConfigError> {
    let params = a.common.solver()?;
    let prec = params.precision;
    let indices = parse_range(&a.orders, "orders")?;
    let cached = match &a.enclosures {
        Some(p) => read_enclosures(p, prec)?,
        None => BTreeMap::new(),
    };

    struct Line {
        d: usize,
        lower: BigScalar,
        upper: BigScalar,
        coeff: BigScalar,
        eval: BigScalar,
        enclosure: Option<(BigScalar, BigScalar)>,
    }
    let lines: Vec<Line> = indices
        .iter()
        .map(|&d| {
            let (lower, upper) = theoretical_bounds(d, prec);
            let (coeff, eval) = markov_bound(d, prec);
            Line {
                d,
                lower,
                upper,
                coeff,
                eval,
                enclosure: cached.get(&(d + 1)).cloned(),
            }
        })
        .collect();
    let sandwich = |l: &Line| {
        l.enclosure
            .as_ref()
            .map(|(lo, hi)| l.lower <= *hi && *lo <= l.upper)
    };
    let violated = lines.iter().any(|l| sandwich(l) == Some(false));
    if violated {
        eprintln!("an enclosure lies outside its theoretical bounds");
    }
    let text = match a.common.format {
        Format::Csv => {
            let mut csv = Csv::new(&[
                "d",
                "threshold_order",
                "lower_bound",
                "upper_bound",
                "markov_coeff",
                "markov_eval",
                "enclosure_lo",
                "enclosure_hi",
                "sandwich",
            ]);
            for l in &lines {
                let (lo, hi) = match &l.enclosure {
                    Some((lo, hi)) => (lo.to_sci(12), hi.to_sci(12)),
                    None => (String::new(), String::new()),
                };
                csv.row([
                    l.d.to_string(),
                    (l.d + 1).to_string(),
                    l.lower.to_sci(12),
                    l.upper.to_sci(12),
                    l.coeff.to_sci(12),
                    l.eval.to_sci(12),
                    lo,
                    hi,
                    sandwich(l).map(|b| b.to_string()).unwrap_or_default(),
                ]);
            }
            csv.finish()
        }
        Format::Json => {
            let rows: Vec<Value> = lines
                .iter()
                .map(|l| {
                    json!({
                        "d": l.d,
                        "threshold_order": l.d + 1,
                        "lower_bound": l.lower.to_sci(30),
                        "upper_bound": l.upper.to_sci(30),
                        "markov_coeff": l.coeff.to_sci(30),
                        "markov_eval": l.eval.to_sci(30),
                        "enclosure": l.enclosure.as_ref().map(|(lo, hi)| json!([lo.to_sci(30), hi.to_sci(30)])),
                        "sandwich": sandwich(l),
                    })
                })
                .collect();
            json_text(&json!({ "rows": rows }))
        }
    };
    emit(a.common.out.as_deref(), &text)?;
    Ok(if violated {
        Status::VerificationFailed
    } else {
        Status::Ok
    })
}
