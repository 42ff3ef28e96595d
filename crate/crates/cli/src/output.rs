//! Result records and their CSV/JSON renderings.
//!
//! Numbers are rounded to 6 significant digits when a cell is built, so both
//! formats print the same values and repeated runs are byte-identical.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Rounds to 6 significant digits. Negative zero becomes zero.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Bool(bool),
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn num(x: f64) -> Cell {
        Cell::Num(round_sig(x))
    }

    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    pub fn opt(x: Option<f64>) -> Cell {
        x.map_or(Cell::text(""), Cell::num)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::text(s)
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Num(x) => write!(f, "{x}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("cells are UTF-8")
    }
}

/// Output of one command invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub command: String,
    pub version: String,
    /// SHA-256 of the command, its arguments and the canonical scenario text.
    pub inputs_digest: String,
    pub summary: BTreeMap<String, Cell>,
    pub table: Table,
}

impl ResultRecord {
    pub fn new(command: &str, digest_input: &str) -> Self {
        ResultRecord {
            command: command.into(),
            version: VERSION.into(),
            inputs_digest: digest(command, digest_input),
            summary: BTreeMap::new(),
            table: Table::default(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Cell>) {
        self.summary.insert(key.into(), value.into());
    }

    pub fn set_num(&mut self, key: &str, value: f64) {
        self.summary.insert(key.into(), Cell::num(value));
    }

    pub fn get(&self, key: &str) -> Option<&Cell> {
        self.summary.get(key)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

pub fn digest(command: &str, input: &str) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update(b"\n");
    h.update(input.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// CSV carries the table only; JSON carries the whole record.
pub fn render(record: &ResultRecord, format: Format) -> String {
    match format {
        Format::Csv => record.table.to_csv(),
        Format::Json => record.to_json(),
    }
}

/// Several records as one document: a JSON array, or one CSV table with the
/// record index and any `key_columns` summary values prepended.
pub fn render_many(records: &[ResultRecord], key_columns: &[&str], format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(records).expect("records serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut cols: Vec<&str> = key_columns.to_vec();
            let first = records.first().map(|r| r.table.columns.clone()).unwrap_or_default();
            cols.extend(first.iter().map(String::as_str));
            let mut t = Table::new(&cols);
            for r in records {
                let keys: Vec<Cell> = key_columns
                    .iter()
                    .map(|k| r.get(k).cloned().unwrap_or(Cell::text("")))
                    .collect();
                for row in &r.table.rows {
                    let mut full = keys.clone();
                    full.extend(row.iter().cloned());
                    t.push(full);
                }
            }
            t.to_csv()
        }
    }
}
