use serde_json::{json, Value};
use sos_staircase::relaxation::{solve_order, ParamPop, Variant};
use sos_staircase::{BigScalar, Scalar};

use crate::args::{parse_epsilon, parse_orders, parse_positive, parse_range, Format, TableArgs};
use crate::output::{emit, json_text, Csv};
use crate::{pool, ConfigError, Status};

struct Row {
    label: String,
    eps: BigScalar,
}

/// Decimal digits carried by `prec` bits.
pub fn full_digits(prec: u32) -> usize {
    ((prec as f64) * std::f64::consts::LOG10_2).floor() as usize
}

/// Six fractional digits, or `0` below the threshold.
pub fn display(v: &BigScalar, zero: &BigScalar) -> String {
    if v.abs() < *zero {
        "0".into()
    } else {
        v.to_fixed(6)
    }
}

fn rows(a: &TableArgs, prec: u32) -> Result<Vec<Row>, ConfigError> {
    if let Some(list) = &a.epsilon {
        return list
            .split(',')
            .map(|s| {
                Ok(Row {
                    label: s.trim().to_string(),
                    eps: parse_epsilon(s, prec)?,
                })
            })
            .collect();
    }
    let ks = match (&a.log10_eps, a.full) {
        (_, true) => (1..=9).collect(),
        (Some(s), _) => parse_range(s, "log10-eps")?,
        (None, _) => (1..=5).collect(),
    };
    Ok(ks
        .into_iter()
        .map(|k| Row {
            label: format!("1e-{k}"),
            eps: BigScalar::pow10(-(k as i32), prec),
        })
        .collect())
}

pub fn run(a: &TableArgs) -> Result<Status, ConfigError> {
    let params = a.common.solver()?;
    let prec = params.precision;
    let orders = if a.full {
        (1..=8).collect()
    } else {
        parse_orders(&a.orders)?
    };
    let zero = parse_positive(&a.zero_threshold, "zero-threshold", prec)?;
    let rows = rows(a, prec)?;

    let cells: Vec<(usize, usize)> = (0..rows.len())
        .flat_map(|i| orders.iter().map(move |&d| (i, d)))
        .collect();
    let results = pool::map(&cells, a.common.jobs, |&(i, d)| {
        let pop =
            ParamPop::new(rows[i].eps.clone(), Variant::Univariate4).map_err(|e| e.to_string())?;
        solve_order(&pop, d, &params).map_err(|e| e.to_string())
    });

    let mut partial = false;
    for ((i, d), r) in cells.iter().zip(&results) {
        if let Err(e) = r {
            partial = true;
            eprintln!("NA at epsilon={} d={d}: {e}", rows[*i].label);
        }
    }
    let per_row = orders.len();
    let text = match a.common.format {
        Format::Csv => {
            let mut header = vec!["epsilon".to_string()];
            header.extend(orders.iter().map(|d| format!("v{d}")));
            let mut csv = Csv::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
            for (i, row) in rows.iter().enumerate() {
                let mut cells = vec![row.label.clone()];
                cells.extend(
                    results[i * per_row..(i + 1) * per_row]
                        .iter()
                        .map(|r| match r {
                            Ok(v) => display(v, &zero),
                            Err(_) => "NA".into(),
                        }),
                );
                csv.row(cells);
            }
            csv.finish()
        }
        Format::Json => {
            let digits = full_digits(prec);
            let doc_rows: Vec<Value> = rows
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    let cells: Vec<Value> = orders
                        .iter()
                        .zip(&results[i * per_row..(i + 1) * per_row])
                        .map(|(d, r)| match r {
                            Ok(v) => json!({"d": d, "value": v.to_sci(digits), "display": display(v, &zero)}),
                            Err(e) => json!({"d": d, "value": null, "display": "NA", "error": e}),
                        })
                        .collect();
                    json!({"epsilon": row.label, "cells": cells})
                })
                .collect();
            json_text(&json!({
                "orders": orders,
                "precision_bits": prec,
                "zero_threshold": a.zero_threshold,
                "rows": doc_rows,
            }))
        }
    };
    emit(a.common.out.as_deref(), &text)?;
    Ok(if partial { Status::Partial } else { Status::Ok })
}
