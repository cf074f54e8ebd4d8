//! Expression parsing, command dispatch and JSON reports.

pub mod args;
pub mod commands;
pub mod parse;
pub mod verify;

use serde_json::{json, Map, Value};

use crate::conjugacy::FormalMap;
use crate::fields::{SingularityClass, Subtype, VectorField};
use crate::series::poly::fmt_monomial;
use crate::series::{Coeff, RationalSeries, Series};
use crate::Error;

pub use args::Cli;
pub use commands::{run, Outcome};
pub use parse::{parse_coeff, parse_field, parse_map, parse_series, Mode};

pub const SCHEMA: u64 = 1;

fn term_list(s: &Series) -> Vec<String> {
    s.terms().map(|(e, c)| fmt_monomial(c, e)).collect()
}

/// `(c)*x^a*y^b` terms joined by ` + `; `0` for the zero series.
pub fn print_series(s: &Series) -> String {
    let t = term_list(s);
    if t.is_empty() {
        "0".to_string()
    } else {
        t.join(" + ")
    }
}

fn print_rational(r: &RationalSeries) -> String {
    match r.to_series() {
        Ok(s) => print_series(&s),
        Err(_) => format!("({})/({})", print_series(&r.num), print_series(&r.den)),
    }
}

/// Text that parses back to the same field when the components are series.
pub fn print_field(v: &VectorField) -> String {
    if let Ok((a, b)) = v.series() {
        let mut parts: Vec<String> = term_list(&a).into_iter().map(|t| format!("{t}*dx")).collect();
        parts.extend(term_list(&b).into_iter().map(|t| format!("{t}*dy")));
        if parts.is_empty() {
            return "0*dx".to_string();
        }
        return parts.join(" + ");
    }
    format!("({})*dx + ({})*dy", print_rational(&v.cx), print_rational(&v.cy))
}

pub fn coeff_json(c: &Coeff) -> Value {
    Value::String(c.to_string())
}

pub fn coeffs_json(cs: &[Coeff]) -> Value {
    Value::Array(cs.iter().map(coeff_json).collect())
}

pub fn series_json(s: &Series) -> Value {
    Value::String(print_series(s))
}

pub fn field_json(v: &VectorField) -> Value {
    Value::String(print_field(v))
}

pub fn map_json(m: &FormalMap) -> Value {
    json!({ "x": print_series(&m.mx), "y": print_series(&m.my) })
}

/// Residuals as JSON numbers; non-finite values become null.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

pub fn class_json(class: &SingularityClass) -> Value {
    let mut m = Map::new();
    m.insert("kind".into(), json!(class.kind_name()));
    if let Some((l1, l2)) = class.eigenvalues() {
        m.insert("lambda1".into(), coeff_json(&l1));
        m.insert("lambda2".into(), coeff_json(&l2));
    }
    if let SingularityClass::NonNilpotent { lambda1, lambda2, subtype } = class {
        m.insert("subtype".into(), json!(subtype.name()));
        m.insert("ratio".into(), coeff_json(&(lambda1 / lambda2)));
        if let Subtype::Resonant { p, q } | Subtype::Node { p, q } = subtype {
            m.insert("p".into(), json!(p));
            m.insert("q".into(), json!(q));
        }
    }
    Value::Object(m)
}

/// Error kind, message and the structured data some variants carry.
pub fn error_json(e: &Error) -> Value {
    let kind = match e {
        Error::OrderMismatch(..) => "order-mismatch",
        Error::NotUnit => "not-unit",
        Error::Precondition(_) => "precondition",
        Error::Degenerate(_) => "degenerate",
        Error::SmallDivisor { .. } => "small-divisor",
        Error::RationalRatio { .. } => "rational-ratio",
        Error::Unsolvable(_) => "unsolvable",
        Error::Inconsistent(_) => "inconsistent",
        Error::Syntax { .. } => "syntax",
        Error::Usage(_) => "usage",
    };
    let mut m = Map::new();
    m.insert("kind".into(), json!(kind));
    m.insert("message".into(), json!(e.to_string()));
    match e {
        Error::SmallDivisor { a, b, divisor } => {
            m.insert("monomial".into(), json!([a, b]));
            m.insert("divisor".into(), num(*divisor));
        }
        Error::RationalRatio { p, q } => {
            m.insert("p".into(), json!(p));
            m.insert("q".into(), json!(q));
        }
        Error::Syntax { line, col, .. } => {
            m.insert("line".into(), json!(line));
            m.insert("column".into(), json!(col));
        }
        _ => {}
    }
    Value::Object(m)
}

/// Indented `key: value` rendering of a report.
pub fn render_text(v: &Value) -> String {
    fn go(v: &Value, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    match x {
                        Value::Object(_) | Value::Array(_) if !is_flat(x) => {
                            out.push_str(&format!("{pad}{k}:\n"));
                            go(x, indent + 1, out);
                        }
                        _ => out.push_str(&format!("{pad}{k}: {}\n", scalar(x))),
                    }
                }
            }
            Value::Array(a) => {
                for x in a {
                    match x {
                        Value::Object(_) | Value::Array(_) if !is_flat(x) => {
                            out.push_str(&format!("{pad}-\n"));
                            go(x, indent + 1, out);
                        }
                        _ => out.push_str(&format!("{pad}- {}\n", scalar(x))),
                    }
                }
            }
            _ => out.push_str(&format!("{pad}{}\n", scalar(v))),
        }
    }
    fn is_flat(v: &Value) -> bool {
        match v {
            Value::Array(a) => a.iter().all(|x| !matches!(x, Value::Object(_) | Value::Array(_))),
            Value::Object(m) => m.is_empty(),
            _ => true,
        }
    }
    fn scalar(v: &Value) -> String {
        match v {
            Value::String(s) => s.clone(),
            Value::Array(a) => format!("[{}]", a.iter().map(scalar).collect::<Vec<_>>().join(", ")),
            other => other.to_string(),
        }
    }
    let mut out = String::new();
    go(v, 0, &mut out);
    out
}
