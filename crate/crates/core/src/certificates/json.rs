use serde_json::{json, Value};

use crate::error::CertError;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

use super::{verify_certificate, GramCertificate, SosDecomposition};

pub const CERT_SCHEMA: &str = "cert-v1";

fn gram_json<T: Scalar>(g: &GramCertificate<T>) -> Value {
    json!({
        "basis_degree": g.basis_degree(),
        "gram": g.gram().to_rows().iter()
            .map(|row| row.iter().map(Scalar::to_exact_string).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

/// `cert-v1` document. Entries are lossless strings: decimals for floats,
/// `p/q` for rationals.
pub fn cert_to_json<T: Scalar>(c: &SosDecomposition<T>) -> Value {
    let ver = verify_certificate(c);
    json!({
        "schema": CERT_SCHEMA,
        "arithmetic": if T::EXACT { "exact" } else { "float" },
        "epsilon": c.epsilon.to_exact_string(),
        "v": c.v.to_exact_string(),
        "q": gram_json(&c.q),
        "r": gram_json(&c.r),
        "s": gram_json(&c.s),
        "metadata": {
            "epsilon": c.epsilon.to_f64(),
            "order": c.order(),
            "residual": ver.residual.to_exact_string(),
            "min_gram_eig": ver.min_gram_eig.to_sci(12),
            "exact_psd": ver.exact_psd,
        },
    })
}

fn fmt_err(m: impl Into<String>) -> CertError {
    CertError::InvalidInput(m.into())
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, CertError> {
    v.get(key).ok_or_else(|| fmt_err(format!("missing field {key:?}")))
}

fn scalar<T>(v: &Value, parse: &impl Fn(&str) -> Result<T, String>) -> Result<T, CertError> {
    let s = v.as_str().ok_or_else(|| fmt_err("scalar entries must be strings"))?;
    parse(s).map_err(fmt_err)
}

fn gram_from<T: Scalar>(
    v: &Value,
    parse: &impl Fn(&str) -> Result<T, String>,
) -> Result<GramCertificate<T>, CertError> {
    let rows = field(v, "gram")?
        .as_array()
        .ok_or_else(|| fmt_err("gram must be an array of rows"))?;
    let m: Vec<Vec<T>> = rows
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| fmt_err("gram row must be an array"))?
                .iter()
                .map(|x| scalar(x, parse))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(fmt_err("gram must be square"));
    }
    let mat = Matrix::from_rows(m);
    if !mat.is_symmetric() {
        return Err(fmt_err("gram must be symmetric"));
    }
    if n == 0 {
        return Ok(GramCertificate::empty(&parse("0").map_err(fmt_err)?));
    }
    Ok(GramCertificate::new(mat))
}

/// Reads a `cert-v1` document with a caller-supplied scalar parser.
pub fn cert_from_json<T: Scalar>(
    v: &Value,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<SosDecomposition<T>, CertError> {
    if v.get("schema").and_then(Value::as_str) != Some(CERT_SCHEMA) {
        return Err(fmt_err(format!("schema must be {CERT_SCHEMA:?}")));
    }
    Ok(SosDecomposition {
        epsilon: scalar(field(v, "epsilon")?, &parse)?,
        v: scalar(field(v, "v")?, &parse)?,
        q: gram_from(field(v, "q")?, &parse)?,
        r: gram_from(field(v, "r")?, &parse)?,
        s: gram_from(field(v, "s")?, &parse)?,
    })
}
