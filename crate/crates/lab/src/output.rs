//! Artifacts: `out/<experiment>/<run-id>/{data.csv, summary.json}`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::ExperimentName;
use crate::error::{LabError, LabResult};

/// Env var naming the default output root.
pub const OUT_ENV: &str = "SPECTRANS_OUT";

/// Round-trip float text: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
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

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> LabResult<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| LabError::Csv(e.into_error().into()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Gate {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// Result of one experiment before it is written out.
#[derive(Debug, Clone)]
pub struct Report {
    pub experiment: ExperimentName,
    pub table: Table,
    pub metrics: Value,
    pub gates: Vec<Gate>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    pub fn gate(&self, name: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.name == name)
    }
}

/// Hash of the resolved section (and seed override), first 12 hex digits.
pub fn default_run_id(resolved: &Value) -> String {
    let digest = Sha256::digest(resolved.to_string().as_bytes());
    digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

pub fn output_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"))
}

pub struct Written {
    pub dir: PathBuf,
    pub summary: Value,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> LabError + '_ {
    move |source| LabError::Io { path: path.to_path_buf(), source }
}

/// Writes the artifacts; the summary is the only place that carries time.
pub fn write_artifacts(root: &Path, run_id: &str, resolved: Value, report: &Report, wall: Duration) -> LabResult<Written> {
    let dir = root.join(report.experiment.as_str()).join(run_id);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let csv_path = dir.join("data.csv");
    fs::write(&csv_path, report.table.to_csv()?).map_err(io_err(&csv_path))?;
    let failed: Vec<&str> = report.gates.iter().filter(|g| !g.passed).map(|g| g.name.as_str()).collect();
    let summary = json!({
        "experiment": report.experiment.as_str(),
        "run_id": run_id,
        "version": env!("CARGO_PKG_VERSION"),
        "config": resolved,
        "metrics": report.metrics,
        "gates": report.gates,
        "failed_gates": failed,
        "all_passed": report.all_passed(),
        "wall_clock_seconds": wall.as_secs_f64(),
        "finished_unix": SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    });
    let json_path = dir.join("summary.json");
    fs::write(&json_path, serde_json::to_vec_pretty(&summary)?).map_err(io_err(&json_path))?;
    Ok(Written { dir, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["E", "note"]);
        t.push(vec![0.5.into(), "a,b".into()]);
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(text, "E,note\r\n5.0000000000000000e-1,\"a,b\"\r\n");
    }

    #[test]
    fn run_id_is_stable() {
        let v = json!({"a": 1, "b": [1.5, 2.0]});
        assert_eq!(default_run_id(&v), default_run_id(&v.clone()));
        assert_ne!(default_run_id(&v), default_run_id(&json!({"a": 2})));
        assert_eq!(default_run_id(&v).len(), 12);
    }
}
