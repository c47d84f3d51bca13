//! Report values: 17 significant digits, `"inf"` for infinity, certificate
//! digests and atomic file output.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use modlab_core::solver::{Certificate, Residuals};
use modlab_core::ExtendedValue;

use crate::fail::{Fail, Outcome};

pub const REPORT_SCHEMA: &str = "modlab.report/1";

/// `x` with 17 significant digits; non-finite values become strings.
pub fn num(x: f64) -> Value {
    if x.is_nan() {
        return Value::String("nan".into());
    }
    if x.is_infinite() {
        return Value::String(if x > 0.0 { "inf" } else { "-inf" }.into());
    }
    let x = if x == 0.0 { 0.0 } else { x };
    Value::Number(format!("{x:.16e}").parse().expect("formatted float is a JSON number"))
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn extended(v: ExtendedValue) -> Value {
    match v {
        ExtendedValue::Finite(x) => num(x),
        ExtendedValue::Infinity => Value::String("inf".into()),
    }
}

/// Text form used by tables and plot files.
pub fn text(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else if x.is_nan() {
        "nan".into()
    } else {
        format!("{:.16e}", if x == 0.0 { 0.0 } else { x })
    }
}

/// SHA-256 of the 17-digit rendering of `xs`.
pub fn digest(xs: &[f64]) -> String {
    let mut h = Sha256::new();
    for &x in xs {
        h.update(text(x).as_bytes());
        h.update(b"\n");
    }
    format!("sha256:{:x}", h.finalize())
}

pub fn residuals(r: &Residuals) -> Value {
    json!({ "primal": num(r.primal), "dual": num(r.dual), "gap": num(r.gap) })
}

pub fn certificate(c: &Certificate) -> Value {
    match c {
        Certificate::Farkas { y } => json!({ "kind": "farkas", "length": y.len(), "digest": digest(y) }),
        Certificate::Ray { direction } => {
            json!({ "kind": "ray", "length": direction.len(), "digest": digest(direction) })
        }
    }
}

/// A report object with the schema and tool version already set.
pub fn base(kind: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), Value::String(REPORT_SCHEMA.into()));
    m.insert("tool".into(), json!({ "name": "modlab", "version": env!("CARGO_PKG_VERSION") }));
    m.insert("kind".into(), Value::String(kind.into()));
    m
}

/// Writes to `out` through a temporary file in the same directory, or to
/// stdout.
pub fn emit(body: &str, out: Option<&Path>) -> Outcome<()> {
    match out {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes()).map_err(|e| Fail::Io(e.to_string()))
        }
        Some(path) => write_atomic(path, body),
    }
}

pub fn write_atomic(path: &Path, body: &str) -> Outcome<()> {
    let io = |e: std::io::Error| Fail::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(body.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn render(report: Map<String, Value>) -> String {
    let mut s = serde_json::to_string_pretty(&Value::Object(report)).expect("reports serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        for x in [1.0, 0.1, -2.5e-300, 6.02e23] {
            let s = serde_json::to_string(&num(x)).unwrap();
            let mantissa = s.split('e').next().unwrap();
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{s}");
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(serde_json::to_string(&num(-0.0)).unwrap(), serde_json::to_string(&num(0.0)).unwrap());
        let back: f64 = serde_json::to_string(&num(std::f64::consts::PI)).unwrap().parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
        assert_eq!(num(f64::INFINITY), Value::String("inf".into()));
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(digest(&[1.0, 2.0]), digest(&[1.0, 2.0]));
        assert_ne!(digest(&[1.0, 2.0]), digest(&[2.0, 1.0]));
    }
}
