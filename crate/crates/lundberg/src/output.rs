//! Tables and their CSV, JSON and text renderings.

use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    pub fn opt(x: Option<f64>) -> Cell {
        x.map_or(Cell::Empty, Cell::Num)
    }

    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

/// A real number rounded to 12 significant digits, printed in the shortest
/// form that reads back as the rounded value.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.0".into();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let a = rounded.abs();
    if (1e-6..1e15).contains(&a) {
        let s = format!("{rounded}");
        if s.contains('.') {
            s
        } else {
            s + ".0"
        }
    } else {
        format!("{rounded:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Two-column `quantity,value` table.
    pub fn key_value() -> Self {
        Table::new(&["quantity", "value"])
    }

    pub fn kv(&mut self, key: &str, value: Cell) {
        self.push(vec![Cell::from(key), value]);
    }

    fn is_key_value(&self) -> bool {
        self.columns == ["quantity", "value"]
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    /// `key=value` lines for two-column tables, aligned columns otherwise.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.is_key_value() {
            for row in &self.rows {
                out.push_str(&format!("{}={}\n", row[0].render(), row[1].render()));
            }
            return out;
        }
        let rendered: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::render).collect()).collect();
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        for row in &rendered {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: Vec<&str>| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            padded.join("  ").trim_end().to_owned() + "\n"
        };
        out.push_str(&line(self.columns.clone()));
        for row in &rendered {
            out.push_str(&line(row.iter().map(String::as_str).collect()));
        }
        out
    }
}

/// A command's result: the domain value for JSON and a flat table for CSV and
/// text.
#[derive(Debug, Clone)]
pub struct Output {
    pub json: serde_json::Value,
    pub table: Table,
}

impl Output {
    pub fn new<T: Serialize>(value: &T, table: Table) -> Self {
        Output { json: serde_json::to_value(value).expect("domain types serialize"), table }
    }

    pub fn emit(&self, format: Format) -> String {
        match format {
            Format::Csv => self.table.to_csv(),
            Format::Text => self.table.to_text(),
            Format::Json => serde_json::to_string_pretty(&self.json).expect("json values serialize") + "\n",
        }
    }
}
