use serde_json::{json, Value};
use sos_staircase::staircase::{sweep, StaircasePoint, Width};

use crate::args::{parse_orders, parse_positive, Format, StaircaseArgs};
use crate::output::{emit, json_text, Csv};
use crate::{ConfigError, Status};

const COLUMNS: [&str; 8] = [
    "d",
    "lo",
    "hi",
    "lower_bound",
    "upper_bound",
    "log10_inv_hi",
    "precision_bits",
    "wall_time_ms",
];

fn cells(p: &StaircasePoint) -> Vec<String> {
    vec![
        p.d.to_string(),
        p.enclosure.lo.to_sci(12),
        p.enclosure.hi.to_sci(12),
        p.lower_bound.to_sci(12),
        p.upper_bound.to_sci(12),
        p.log10_inv_hi().to_fixed(6),
        p.enclosure.max_precision().to_string(),
        p.wall_time_ms.to_string(),
    ]
}

pub fn run(a: &StaircaseArgs) -> Result<Status, ConfigError> {
    let params = a.common.solver()?;
    let orders = parse_orders(&a.orders)?;
    let width = parse_positive(&a.rel_width, "rel-width", params.precision)?;
    let run = sweep(&orders, &Width::Relative(width), &params, a.common.jobs);

    let mut partial = false;
    for r in &run.points {
        if let Err((d, e)) = r {
            partial = true;
            eprintln!("NA at d={d}: {e}");
        }
    }
    let slope = run.slope.as_ref().map(|s| s.to_fixed(4));
    match &slope {
        Some(s) => eprintln!("fitted slope of ln(1/eps_d) against d: {s}"),
        None => eprintln!("fitted slope unavailable: fewer than two thresholds with d >= 2"),
    }
    let text = match a.common.format {
        Format::Csv => {
            let mut csv = Csv::new(&COLUMNS);
            for r in &run.points {
                match r {
                    Ok(p) => csv.row(cells(p)),
                    Err((d, _)) => {
                        let mut row = vec![d.to_string()];
                        row.extend(std::iter::repeat("NA".to_string()).take(COLUMNS.len() - 1));
                        csv.row(row);
                    }
                }
            }
            csv.finish()
        }
        Format::Json => {
            let points: Vec<Value> = run
                .points
                .iter()
                .map(|r| match r {
                    Ok(p) => {
                        let mut obj = serde_json::Map::new();
                        for (k, v) in COLUMNS.iter().zip(cells(p)) {
                            obj.insert(k.to_string(), Value::String(v));
                        }
                        obj.insert("ln_inv".into(), Value::String(p.ln_inv().to_fixed(6)));
                        obj.insert("sandwich".into(), Value::Bool(p.sandwich_holds()));
                        obj.insert(
                            "evidence".into(),
                            serde_json::to_value(&p.enclosure.evidence).expect("serializable"),
                        );
                        Value::Object(obj)
                    }
                    Err((d, e)) => json!({"d": d, "error": e.to_string()}),
                })
                .collect();
            json_text(&json!({"points": points, "slope": slope}))
        }
    };
    emit(a.common.out.as_deref(), &text)?;
    Ok(if partial { Status::Partial } else { Status::Ok })
}
