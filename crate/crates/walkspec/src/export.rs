//! CSV and JSON emission.
//!
//! Floats use Rust's shortest round-trip formatting, so parsing a written
//! value gives back the same `f64`. Missing values are written as empty CSV
//! cells and JSON `null`.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = concat!("walkspec ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(Option<f64>),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(Some(x))
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        Cell::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:?}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(Some(x)) => format_float(*x),
            Cell::Float(None) => String::new(),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => csv_field(s),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(Some(x)) if x.is_finite() => Value::from(*x),
            Cell::Float(Some(x)) => Value::from(format_float(*x)),
            Cell::Float(None) => Value::Null,
            Cell::Int(n) => Value::from(*n),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

/// A table with provenance metadata.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    /// Ordered `key=value` pairs written as `# key=value` lines.
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { meta: Vec::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# schema={SCHEMA_VERSION}\n");
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        let header: Vec<String> = self.columns.iter().map(|c| csv_field(c)).collect();
        let _ = writeln!(out, "{}", header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json_value(&self) -> Value {
        let mut root = Map::new();
        root.insert("schema".into(), Value::from(SCHEMA_VERSION));
        for (k, v) in &self.meta {
            root.insert(k.clone(), Value::from(v.as_str()));
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                Value::Object(obj)
            })
            .collect();
        root.insert("rows".into(), Value::Array(rows));
        Value::Object(root)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("serialisable");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path, json: bool) -> io::Result<()> {
        std::fs::write(path, if json { self.to_json() } else { self.to_csv() })
    }
}

/// Gnuplot script plotting every numeric column against the first.
pub fn gnuplot_script(table: &Table, data_file: &str, y_columns: &[&str]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set datafile commentschars '#'");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set xlabel '{}'", table.columns.first().map_or("x", String::as_str));
    let plots: Vec<String> = y_columns
        .iter()
        .filter_map(|c| table.columns.iter().position(|x| x == c))
        .map(|i| format!("'{data_file}' using 1:{} with linespoints", i + 1))
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

/// Quotes an argument for a POSIX shell when it needs quoting.
pub fn shell_quote(arg: &str) -> String {
    let plain = !arg.is_empty() && arg.chars().all(|c| c.is_ascii_alphanumeric() || "-_=.,:/+@%".contains(c));
    if plain {
        arg.to_string()
    } else {
        format!("'{}'", arg.replace('\'', "'\\''"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-300, 6.02e23, 0.0, -2.5] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_float(1.0), "1.0");
        assert_eq!(format_float(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["lambda", "rho", "note"]);
        t.meta("model", "free:2,1");
        t.push(vec![1.0.into(), None.into(), "a,b".into()]);
        assert_eq!(t.to_csv(), "# schema=1\n# model=free:2,1\nlambda,rho,note\n1.0,,\"a,b\"\n");
    }

    #[test]
    fn json_mirrors_csv() {
        let mut t = Table::new(&["lambda", "rho"]);
        t.meta("seed", 7);
        t.push(vec![0.5.into(), None.into()]);
        let v = t.to_json_value();
        assert_eq!(v["seed"], "7");
        assert_eq!(v["rows"][0]["lambda"], 0.5);
        assert!(v["rows"][0]["rho"].is_null());
    }

    #[test]
    fn quoting() {
        assert_eq!(shell_quote("--model"), "--model");
        assert_eq!(shell_quote("free:2,1"), "free:2,1");
        assert_eq!(shell_quote("a b"), "'a b'");
        assert_eq!(shell_quote("it's"), "'it'\\''s'");
    }
}
