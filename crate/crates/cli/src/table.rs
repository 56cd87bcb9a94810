//! Column-typed result tables and their CSV/JSON encodings.

use serde::Serialize;
use serde_json::{json, Map, Value};
use std::io::Write;

use crate::error::CliError;

/// Version of the file layout; bump on any column or key change.
pub const SCHEMA: &str = "vpt-output/1";

/// Physical kind of a column, used for the optional SI conversion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Plain,
    Energy,
    Field,
    InverseTemperature,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Missing,
    Int(i64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Float)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: Kind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

/// SI equivalents of the natural units.
pub mod si {
    /// Field unit in tesla.
    pub const FIELD_T: f64 = 2.35e5;
    /// Energy unit (2 Ryd) in eV.
    pub const ENERGY_EV: f64 = 27.21;
    /// Temperature unit in kelvin.
    pub const TEMPERATURE_K: f64 = 3.16e5;
}

impl Table {
    pub fn new(columns: &[(&str, Kind)]) -> Self {
        Self {
            columns: columns.iter().map(|(n, k)| Column { name: (*n).to_string(), kind: *k }).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    /// Energies to eV, fields to tesla, and β to a temperature in kelvin.
    pub fn to_si(&self) -> Table {
        let columns = self
            .columns
            .iter()
            .map(|c| {
                let name = match c.kind {
                    Kind::Plain => c.name.clone(),
                    Kind::Energy => format!("{}_eV", c.name),
                    Kind::Field => format!("{}_T", c.name),
                    Kind::InverseTemperature => "T_K".to_string(),
                };
                Column { name, kind: Kind::Plain }
            })
            .collect();
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.columns)
                    .map(|(cell, col)| match (cell, col.kind) {
                        (Cell::Float(v), Kind::Energy) => Cell::Float(v * si::ENERGY_EV),
                        (Cell::Float(v), Kind::Field) => Cell::Float(v * si::FIELD_T),
                        (Cell::Float(v), Kind::InverseTemperature) => Cell::Float(si::TEMPERATURE_K / v),
                        _ => cell.clone(),
                    })
                    .collect()
            })
            .collect();
        Table { columns, rows }
    }
}

/// Float text with 17 significant digits, which round-trips any f64.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Float(v) => format_float(*v),
        Cell::Missing => String::new(),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Bool(b) => b.to_string(),
    }
}

pub fn write_csv<W: Write>(table: &Table, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(table.columns.iter().map(|c| c.name.as_str()))?;
    for row in &table.rows {
        w.write_record(row.iter().map(cell_text))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads back a CSV written by `write_csv`, given the column layout.
pub fn read_csv<R: std::io::Read>(input: R, template: &Table) -> Result<Table, CliError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let expected: Vec<&str> = template.columns.iter().map(|c| c.name.as_str()).collect();
    if header != expected {
        return Err(CliError::Usage(format!("unexpected CSV header {header:?}")));
    }
    let mut out = Table { columns: template.columns.clone(), rows: Vec::new() };
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .zip(template.rows.first().map(|r| r.as_slice()).unwrap_or(&[]))
            .map(|(text, like)| parse_cell(text, like))
            .collect::<Result<Vec<_>, _>>()?;
        out.rows.push(row);
    }
    Ok(out)
}

fn parse_cell(text: &str, like: &Cell) -> Result<Cell, CliError> {
    let bad = || CliError::Usage(format!("cannot parse CSV cell {text:?}"));
    if text.is_empty() && matches!(like, Cell::Float(_) | Cell::Missing) {
        return Ok(Cell::Missing);
    }
    Ok(match like {
        Cell::Float(_) | Cell::Missing => Cell::Float(text.parse().map_err(|_| bad())?),
        Cell::Int(_) => Cell::Int(text.parse().map_err(|_| bad())?),
        Cell::Bool(_) => Cell::Bool(text.parse().map_err(|_| bad())?),
        Cell::Text(_) => Cell::Text(text.to_string()),
    })
}

fn cell_json(c: &Cell) -> Value {
    match c {
        // NaN and infinities have no JSON form
        Cell::Float(v) if v.is_finite() => json!(v),
        Cell::Float(_) | Cell::Missing => Value::Null,
        Cell::Int(i) => json!(i),
        Cell::Text(s) => json!(s),
        Cell::Bool(b) => json!(b),
    }
}

pub fn to_json<C: Serialize>(table: &Table, config: &C) -> Result<Value, CliError> {
    let records: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut m = Map::new();
            for (col, cell) in table.columns.iter().zip(row) {
                m.insert(col.name.clone(), cell_json(cell));
            }
            Value::Object(m)
        })
        .collect();
    Ok(json!({ "schema": SCHEMA, "config": serde_json::to_value(config)?, "records": records }))
}
