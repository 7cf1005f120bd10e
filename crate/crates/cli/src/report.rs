//! Tables, checks and the JSON report, and writing them to disk.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use buffdyn_core::Complex;
use serde::Serialize;

use crate::config::ExperimentKind;
use crate::error::{CliError, Result};
use crate::svg::Figure;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    /// CSV field; reals carry 17 significant digits.
    pub fn csv_field(&self) -> String {
        match self {
            Cell::Int(k) => k.to_string(),
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<i64> for Cell {
    fn from(k: i64) -> Self {
        Cell::Int(k)
    }
}

impl From<u32> for Cell {
    fn from(k: u32) -> Self {
        Cell::Int(k as i64)
    }
}

impl From<usize> for Cell {
    fn from(k: usize) -> Self {
        Cell::Int(k as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Large sample dumps go to CSV only.
    #[serde(skip)]
    pub inline: bool,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), inline: true }
    }

    pub fn samples(name: &str, columns: &[&str]) -> Self {
        Table { inline: false, ..Table::new(name, columns) }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::csv_field))?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Split a complex number into two cells.
pub fn cx(z: Complex) -> [Cell; 2] {
    [Cell::Num(z.re), Cell::Num(z.im)]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableEntry {
    pub name: String,
    pub file: String,
    pub columns: Vec<String>,
    pub row_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Vec<Cell>>>,
}

/// Everything one run produces. The JSON form carries no timing so that
/// identical configs give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: ExperimentKind,
    pub name: String,
    pub inputs: BTreeMap<String, BTreeMap<String, String>>,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub results: serde_json::Value,
    pub tables: Vec<TableEntry>,
    pub figures: Vec<String>,
}

/// A finished run before it is written out.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub results: serde_json::Value,
    pub tables: Vec<Table>,
    pub figures: Vec<Figure>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn figure(&self, name: &str) -> Option<&Figure> {
        self.figures.iter().find(|f| f.name == name)
    }

    pub fn report(&self, experiment: ExperimentKind, name: &str, inputs: BTreeMap<String, BTreeMap<String, String>>) -> ExperimentReport {
        ExperimentReport {
            experiment,
            name: name.into(),
            inputs,
            pass: self.pass(),
            checks: self.checks.clone(),
            notes: self.notes.clone(),
            results: self.results.clone(),
            tables: self
                .tables
                .iter()
                .map(|t| TableEntry {
                    name: t.name.clone(),
                    file: format!("{name}_{}.csv", t.name),
                    columns: t.columns.clone(),
                    row_count: t.rows.len(),
                    rows: t.inline.then(|| t.rows.clone()),
                })
                .collect(),
            figures: self.figures.iter().map(|f| format!("{name}_{}.svg", f.name)).collect(),
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Write `<name>.json`, one CSV per table and one SVG per figure.
pub fn write_outputs(report: &ExperimentReport, outcome: &Outcome, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let mut written = Vec::new();
    let json = dir.join(format!("{}.json", report.name));
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    write_file(&json, text.as_bytes())?;
    written.push(json);
    for (entry, table) in report.tables.iter().zip(&outcome.tables) {
        let path = dir.join(&entry.file);
        write_file(&path, table.to_csv()?.as_bytes())?;
        written.push(path);
    }
    for (file, fig) in report.figures.iter().zip(&outcome.figures) {
        let path = dir.join(file);
        write_file(&path, fig.render().as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
