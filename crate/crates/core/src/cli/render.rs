use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::{Map, Value};

use crate::numfmt::{fmt12, round12};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Structured,
}

/// A command's result: the structured document and the rows used by the
/// tabular formats.
pub struct Output {
    pub doc: Value,
    /// Flat records, one CSV line each. Empty means "flatten `doc`".
    pub rows: Vec<Value>,
    /// Field of `doc` holding `rows`, left out of the table summary.
    pub rows_key: Option<&'static str>,
}

impl Output {
    pub fn single(doc: Value) -> Self {
        Self { doc: round_value(doc), rows: Vec::new(), rows_key: None }
    }

    pub fn with_rows(doc: Value, rows_key: &'static str) -> Self {
        let doc = round_value(doc);
        let rows = match doc.get(rows_key) {
            Some(Value::Array(a)) => a.clone(),
            _ => Vec::new(),
        };
        Self { doc, rows, rows_key: Some(rows_key) }
    }

    pub fn list(items: Vec<Value>) -> Self {
        let items: Vec<Value> = items.into_iter().map(round_value).collect();
        Self { doc: Value::Array(items.clone()), rows: items, rows_key: None }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Structured => {
                let mut s = serde_json::to_string_pretty(&self.doc).expect("json values serialize");
                s.push('\n');
                s
            }
            Format::Csv => {
                let rows: Vec<Vec<(String, String)>> = if self.rows.is_empty() {
                    vec![flatten(&self.doc)]
                } else {
                    self.rows.iter().map(flatten).collect()
                };
                csv(&rows)
            }
            Format::Table => {
                let mut out = String::new();
                if let Value::Object(map) = &self.doc {
                    let mut summary = map.clone();
                    if let Some(k) = self.rows_key {
                        summary.remove(k);
                    }
                    let pairs = flatten(&Value::Object(summary));
                    let w = pairs.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
                    for (k, v) in pairs {
                        let _ = writeln!(out, "{k:<w$}  {v}");
                    }
                }
                if !self.rows.is_empty() {
                    if !out.is_empty() {
                        out.push('\n');
                    }
                    out.push_str(&table(&self.rows.iter().map(flatten).collect::<Vec<_>>()));
                }
                out
            }
        }
    }
}

/// Rounds every float in the tree to 12 significant digits.
pub fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round12(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match n.as_i64().or_else(|| n.as_u64().map(|u| u as i64)) {
            Some(i) if !n.is_f64() => i.to_string(),
            _ => fmt12(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(scalar_text).collect::<Vec<_>>().join(";"),
        Value::Object(_) => serde_json::to_string(v).expect("json values serialize"),
    }
}

/// Dotted key/value pairs of an object; arrays of scalars are joined.
fn flatten(v: &Value) -> Vec<(String, String)> {
    fn go(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(m) => walk(prefix, m, out),
            _ => out.push((prefix.to_string(), scalar_text(v))),
        }
    }
    fn walk(prefix: &str, m: &Map<String, Value>, out: &mut Vec<(String, String)>) {
        for (k, v) in m {
            let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            go(&key, v, out);
        }
    }
    let mut out = Vec::new();
    go("", v, &mut out);
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv(rows: &[Vec<(String, String)>]) -> String {
    let mut out = String::new();
    if let Some(first) = rows.first() {
        let header: Vec<String> = first.iter().map(|(k, _)| csv_field(k)).collect();
        let _ = writeln!(out, "{}", header.join(","));
    }
    for r in rows {
        let line: Vec<String> = r.iter().map(|(_, v)| csv_field(v)).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

fn table(rows: &[Vec<(String, String)>]) -> String {
    let Some(first) = rows.first() else { return String::new() };
    let widths: Vec<usize> = first
        .iter()
        .enumerate()
        .map(|(i, (k, _))| rows.iter().map(|r| r.get(i).map_or(0, |c| c.1.chars().count())).max().unwrap_or(0).max(k.chars().count()))
        .collect();
    let mut out = String::new();
    let line = |cells: Vec<&str>| -> String {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        padded.join("  ").trim_end().to_string()
    };
    let _ = writeln!(out, "{}", line(first.iter().map(|(k, _)| k.as_str()).collect()));
    for r in rows {
        let _ = writeln!(out, "{}", line(r.iter().map(|(_, v)| v.as_str()).collect()));
    }
    out
}
