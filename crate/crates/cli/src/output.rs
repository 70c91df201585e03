//! Tables, checks and their CSV / JSON / plot-data renderings.

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Map, Value};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => format!("{v:.11e}"),
            Cell::Num(v) => format!("{v}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Table { name: name.into(), headers: headers.iter().map(|h| h.to_string()).collect(), rows: vec![] }
    }

    pub fn with_headers(name: &str, headers: Vec<String>) -> Self {
        Table { name: name.into(), headers, rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    fn json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| Value::Object(self.headers.iter().cloned().zip(r.iter().map(Cell::json)).collect::<Map<_, _>>()))
                .collect(),
        )
    }
}

/// One named acceptance check with its tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: String,
    pub pass: bool,
}

/// Everything a subcommand produces.
#[derive(Debug, Default)]
pub struct Report {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    /// Two-column plot files: name and `(x, y)` pairs.
    pub plots: Vec<(String, Vec<(f64, f64)>)>,
}

impl Report {
    pub fn check(&mut self, name: &str, value: f64, tolerance: impl Into<String>, pass: bool) {
        self.checks.push(Check { name: name.into(), value, tolerance: tolerance.into(), pass });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn checks_table(&self) -> Table {
        let mut t = Table::new("checks", &["check", "value", "tolerance", "pass"]);
        for c in &self.checks {
            t.push(vec![c.name.clone().into(), c.value.into(), c.tolerance.clone().into(), c.pass.into()]);
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// JSON floats with 17 significant digits.
struct Precise;

impl Formatter for Precise {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_json_string(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise);
    value.serialize(&mut ser).expect("serializing a Value cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn write_csv(path: &Path, table: &Table) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.headers)?;
    for r in &table.rows {
        w.write_record(r.iter().map(Cell::csv))?;
    }
    w.flush()
}

pub struct Sink {
    pub dir: PathBuf,
    pub format: Format,
}

impl Sink {
    pub fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    /// Write all artifacts of `report` under the command name `cmd`.
    pub fn emit(&self, cmd: &str, config: &str, report: &Report) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(&self.dir)?;
        let mut written = Vec::new();
        let sidecar = self.path("run_config.txt");
        fs::write(&sidecar, config)?;
        written.push(sidecar);
        match self.format {
            Format::Csv => {
                for t in report.tables.iter().chain(std::iter::once(&report.checks_table())) {
                    let p = self.path(&format!("{cmd}_{}.csv", t.name));
                    write_csv(&p, t)?;
                    written.push(p);
                }
            }
            Format::Json => {
                let mut tables = Map::new();
                for t in &report.tables {
                    tables.insert(t.name.clone(), t.json());
                }
                let doc = json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": cmd,
                    "config": config,
                    "tables": tables,
                    "checks": serde_json::to_value(&report.checks).expect("checks serialize"),
                    "pass": report.all_pass(),
                });
                let p = self.path(&format!("{cmd}.json"));
                fs::write(&p, to_json_string(&doc) + "\n")?;
                written.push(p);
            }
        }
        for (name, pts) in &report.plots {
            let p = self.path(&format!("{name}.dat"));
            let mut s = String::new();
            for (x, y) in pts {
                s.push_str(&format!("{x:.11e} {y:.11e}\n"));
            }
            fs::write(&p, s)?;
            written.push(p);
        }
        Ok(written)
    }

    pub fn mark_failed(&self, cmd: &str, reason: &str) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        fs::write(self.path(&format!("{cmd}.FAILED")), format!("{reason}\n"))
    }
}
