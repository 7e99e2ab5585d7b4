use serde_json::{json, Value};
use sos_staircase::relaxation::{even_directions, project2d, ParamPop, Variant};

use crate::args::{parse_epsilon, parse_orders, Format, ProjectArgs};
use crate::output::{emit, json_text, Csv};
use crate::{pool, ConfigError, Status};

pub fn run(a: &ProjectArgs) -> Result<Status, ConfigError> {
    let params = a.common.solver()?;
    let prec = params.precision;
    let orders = parse_orders(&a.orders)?;
    if a.directions < 8 {
        return Err(ConfigError(format!(
            "--directions must be at least 8, got {}",
            a.directions
        )));
    }
    let eps = parse_epsilon(&a.epsilon, prec)?;
    let pop = ParamPop::new(eps, Variant::Bivariate3).map_err(|e| ConfigError(e.to_string()))?;
    let dirs = even_directions(a.directions, prec);

    let results = pool::map(&orders, a.common.jobs, |&d| {
        project2d(&pop, d, &dirs, &params).map_err(|e| e.to_string())
    });
    let mut partial = false;
    for (d, r) in orders.iter().zip(&results) {
        if let Err(e) = r {
            partial = true;
            eprintln!("NA at d={d}: {e}");
        }
    }
    let text = match a.common.format {
        Format::Csv => {
            let mut csv = Csv::new(&["d", "k", "u1", "u2", "support"]);
            for (d, r) in orders.iter().zip(&results) {
                for (k, (u1, u2)) in dirs.iter().enumerate() {
                    let support = match r {
                        Ok(vals) => vals[k].to_fixed(10),
                        Err(_) => "NA".into(),
                    };
                    csv.row([
                        d.to_string(),
                        k.to_string(),
                        u1.to_fixed(6),
                        u2.to_fixed(6),
                        support,
                    ]);
                }
            }
            csv.finish()
        }
        Format::Json => {
            let per_order: Vec<Value> = orders
                .iter()
                .zip(&results)
                .map(|(d, r)| match r {
                    Ok(vals) => json!({"d": d, "support": vals.iter().map(|v| v.to_sci(30)).collect::<Vec<_>>()}),
                    Err(e) => json!({"d": d, "error": e}),
                })
                .collect();
            let directions: Vec<Value> = dirs
                .iter()
                .map(|(u1, u2)| json!([u1.to_fixed(12), u2.to_fixed(12)]))
                .collect();
            json_text(&json!({
                "epsilon": a.epsilon,
                "directions": directions,
                "orders": per_order,
            }))
        }
    };
    emit(a.common.out.as_deref(), &text)?;
    Ok(if partial { Status::Partial } else { Status::Ok })
}
