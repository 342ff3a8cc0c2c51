//! Row-oriented output tables with byte-deterministic CSV and JSON-lines
//! rendering.

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?} (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Metadata echoed in the JSON header line.
    pub meta: Value,
    /// Optional closing record (CSV: a `#` comment line).
    pub trailer: Option<(String, Value)>,
}

impl Table {
    pub fn new(columns: &[&str], meta: Value) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            meta,
            trailer: None,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[idx]).collect())
    }

    /// Numeric column values; empty cells become NaN.
    pub fn numbers(&self, name: &str) -> Option<Vec<f64>> {
        Some(
            self.column(name)?
                .into_iter()
                .map(|c| match c {
                    Cell::Num(v) => *v,
                    _ => f64::NAN,
                })
                .collect(),
        )
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => fmt_sig(*v),
                    Cell::Text(s) => s.clone(),
                    Cell::Empty => String::new(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        if let Some((text, _)) = &self.trailer {
            out.push_str("# ");
            out.push_str(text);
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let mut out = json!({ "meta": self.meta }).to_string();
        out.push('\n');
        for row in &self.rows {
            let mut obj = Map::new();
            for (name, cell) in self.columns.iter().zip(row) {
                let v = match cell {
                    Cell::Num(v) if v.is_finite() => json!(v),
                    Cell::Num(_) | Cell::Empty => Value::Null,
                    Cell::Text(s) => json!(s),
                };
                obj.insert(name.clone(), v);
            }
            out.push_str(&Value::Object(obj).to_string());
            out.push('\n');
        }
        if let Some((_, v)) = &self.trailer {
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }
}

/// Formats `v` with 12 significant digits, `%g` style: plain notation for
/// decimal exponents in `[-5, 12)`, scientific otherwise. Locale-free.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
