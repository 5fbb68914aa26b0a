//! JSON and CSV rendering with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde_json::{Map, Value};

use crate::error::CliError;

/// `%.17g`: shortest fixed or scientific form carrying 17 significant
/// digits, with trailing zeros removed. Non-finite values become the strings
/// `"NaN"`, `"Infinity"` and `"-Infinity"` at the JSON level.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_u64() {
                write!(out, "{i}").unwrap();
            } else if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else {
                out.push_str(&format_number(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_value(out, item);
            }
            out.push('}');
        }
    }
}

/// Renders a document on one line.
pub fn render(doc: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, doc);
    out
}

/// A float as a JSON value; non-finite values become strings.
pub fn num(x: f64) -> Value {
    match serde_json::Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None if x.is_nan() => Value::String("NaN".into()),
        None if x > 0.0 => Value::String("Infinity".into()),
        None => Value::String("-Infinity".into()),
    }
}

pub fn vector(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn matrix(m: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| num(m[(i, j)])).collect()))
            .collect(),
    )
}

/// A JSON document under construction, starting from the metadata keys.
pub struct Document(Map<String, Value>);

impl Document {
    pub fn new(command: &str, seed: u64) -> Self {
        let mut map = Map::new();
        map.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
        map.insert("command".into(), Value::String(command.into()));
        map.insert("seed".into(), Value::from(seed));
        Self(map)
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.0.insert(key.into(), value.into());
        self
    }

    pub fn into_value(self) -> Value {
        Value::Object(self.0)
    }
}

/// Rows of a CSV table with a fixed header.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells.into_iter().map(Cell::render).collect());
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.render()).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }
}

/// One CSV cell.
pub enum Cell {
    Int(usize),
    Num(f64),
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) if x.is_finite() => format_number(x),
            Cell::Num(x) if x.is_nan() => "NaN".into(),
            Cell::Num(x) => if x > 0.0 { "Infinity" } else { "-Infinity" }.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 1e-5, 123456.789, f64::MAX, f64::MIN_POSITIVE] {
            let s = format_number(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_number(0.25), "0.25");
        assert_eq!(format_number(0.1), "0.10000000000000001");
        assert_eq!(format_number(1e20), "1e20");
        assert_eq!(format_number(-3.0), "-3");
        assert_eq!(format_number(0.0), "0");
    }

    #[test]
    fn rendered_numbers_are_valid_json() {
        let doc = serde_json::json!({"a": [0.1, 1e-7, 3], "b": {"c": -1.5e22}});
        let s = render(&doc);
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"][0].as_f64(), Some(0.1));
        assert_eq!(back["a"][1].as_f64(), Some(1e-7));
        assert_eq!(back["b"]["c"].as_f64(), Some(-1.5e22));
    }

    #[test]
    fn non_finite_values_become_strings() {
        assert_eq!(num(f64::INFINITY), Value::String("Infinity".into()));
        assert_eq!(render(&vector(&[f64::NAN])), "[\"NaN\"]");
    }

    #[test]
    fn csv_rows_follow_the_header() {
        let mut t = Table::new(["i", "x"]);
        t.push(vec![Cell::Int(0), Cell::Num(0.5)]);
        assert_eq!(t.render(), "i,x\n0,0.5\n");
    }
}
