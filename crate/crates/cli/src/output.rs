//! Tables rendered as CSV (with a `#` metadata header) or as a JSON
//! `{meta, data}` envelope. Real numbers are printed with 15 significant
//! digits in both formats.

use std::fmt::Write as _;

use serde_json::{Map, Number, Value};

/// Output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    /// A list of reals, `;`-separated in CSV.
    List(Vec<f64>),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<Vec<f64>> for Cell {
    fn from(x: Vec<f64>) -> Self {
        Cell::List(x)
    }
}

/// Formats `x` with 15 significant digits, dropping trailing zeros;
/// scientific notation outside `[1e-5, 1e15)`.
pub fn fmt15(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.14e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        trim_zeros(format!("{:.*}", (14 - exp) as usize, x))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0');
    t.strip_suffix('.').unwrap_or(t).to_string()
}

fn json_num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    // round through the printed form so JSON carries the same digits as CSV
    let y: f64 = fmt15(x).parse().expect("fmt15 output parses");
    Number::from_f64(y).map_or(Value::Null, Value::Number)
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
            Cell::Num(x) => fmt15(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => csv_field(s),
            Cell::Bool(b) => b.to_string(),
            Cell::List(v) => v.iter().map(|x| fmt15(*x)).collect::<Vec<_>>().join(";"),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json_num(*x),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
            Cell::List(v) => Value::Array(v.iter().map(|x| json_num(*x)).collect()),
        }
    }
}

/// A named table with column units and metadata.
#[derive(Debug, Clone, Default)]
pub struct Table {
    meta: Vec<(String, Cell)>,
    columns: Vec<(String, String)>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    /// `columns` are `(name, unit)`; use `""` for dimensionless labels.
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Self {
            columns: columns.iter().map(|(c, u)| (c.to_string(), u.to_string())).collect(),
            ..Self::default()
        }
    }

    pub fn with_columns(columns: Vec<(String, String)>) -> Self {
        Self { columns, ..Self::default() }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Cell>) -> &mut Self {
        self.meta.push((key.to_string(), value.into()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json => self.json(),
        }
    }

    fn csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}: {}", v.csv());
        }
        let units: Vec<String> = self
            .columns
            .iter()
            .map(|(c, u)| format!("{c}[{}]", if u.is_empty() { "-" } else { u }))
            .collect();
        let _ = writeln!(out, "# units: {}", units.join(" "));
        let header: Vec<&str> = self.columns.iter().map(|(c, _)| c.as_str()).collect();
        let _ = writeln!(out, "{}", header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    fn json(&self) -> String {
        let mut meta = Map::new();
        for (k, v) in &self.meta {
            meta.insert(k.clone(), v.json());
        }
        let units: Map<String, Value> = self
            .columns
            .iter()
            .map(|(c, u)| (c.clone(), Value::from(u.as_str())))
            .collect();
        meta.insert("units".into(), Value::Object(units));
        let data: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|((c, _), v)| (c.clone(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut root = Map::new();
        root.insert("meta".into(), Value::Object(meta));
        root.insert("data".into(), Value::Array(data));
        let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("serialisable");
        s.push('\n');
        s
    }
}
