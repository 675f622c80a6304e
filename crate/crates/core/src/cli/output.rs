//! CSV tables and the run manifest.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::numerics::Enclosure;
use crate::spectrum::SpectrumCurve;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
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

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

/// `value, low, high` cells of an enclosure.
pub fn enclosure_cells(e: Enclosure) -> [Cell; 3] {
    [e.value.into(), e.lo.into(), e.hi.into()]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// One row per spectrum point: `a,b,b_low,b_high,alpha,f,f_low,f_high`.
pub fn spectrum_table(curve: &SpectrumCurve) -> Table {
    let mut t = Table::new(&["a", "b", "b_low", "b_high", "alpha", "f", "f_low", "f_high"]);
    for p in &curve.points {
        let [b, b_lo, b_hi] = enclosure_cells(p.b);
        let [f, f_lo, f_hi] = enclosure_cells(p.f);
        t.push(vec![p.a.into(), b, b_lo, b_hi, p.alpha.into(), f, f_lo, f_hi]);
    }
    t
}

/// Scientific notation with `precision` digits after the point; infinities
/// are written `inf` and `-inf`.
pub fn format_float(x: f64, precision: usize) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.precision$e}")
    }
}

fn render(cell: &Cell, precision: usize) -> String {
    match cell {
        Cell::Num(x) => format_float(*x, precision),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

pub fn write_csv<W: std::io::Write>(table: &Table, out: W, precision: usize) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| render(c, precision)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(table: &Table, path: &Path, precision: usize) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(table, std::io::BufWriter::new(file), precision)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub version: String,
    pub command: String,
    pub status: String,
    pub exit_code: i32,
    pub config_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_message: Option<String>,
    pub artifacts: Vec<String>,
    pub notes: Vec<String>,
    /// `[low, value, high]` of each reported quantity.
    pub brackets: BTreeMap<String, [f64; 3]>,
    pub checks: BTreeMap<String, bool>,
}

impl Manifest {
    pub fn new(command: &str, config_sha256: String) -> Self {
        Manifest {
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            status: "ok".into(),
            exit_code: 0,
            config_sha256,
            error: None,
            error_message: None,
            artifacts: Vec::new(),
            notes: Vec::new(),
            brackets: BTreeMap::new(),
            checks: BTreeMap::new(),
        }
    }

    pub fn bracket(&mut self, name: &str, e: Enclosure) {
        self.brackets.insert(name.into(), [e.lo, e.value, e.hi]);
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| crate::Error::Io(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
