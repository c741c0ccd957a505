//! Tables and reports with a provenance header, rendered as CSV or JSON.
//!
//! CSV files open with a `# key: value` comment block (values are compact
//! JSON). Floats are written as `{:.16e}`, which round-trips every `f64`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::CliError;

pub type Meta = BTreeMap<String, Value>;

pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => sci(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            // non-finite floats become null
            Cell::Float(x) => json!(x),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, meta: &Meta, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => {
                let mut out = Vec::new();
                for (k, v) in meta {
                    out.extend_from_slice(format!("# {k}: {v}\n").as_bytes());
                }
                let mut w = csv::Writer::from_writer(out);
                let io = |e: csv::Error| CliError::Output(e.to_string());
                w.write_record(&self.columns).map_err(io)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
                }
                w.into_inner().map_err(|e| CliError::Output(e.to_string()))
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
                    .collect();
                let doc = json!({ "provenance": meta, "columns": self.columns, "rows": rows });
                let mut out = serde_json::to_vec(&doc).map_err(|e| CliError::Output(e.to_string()))?;
                out.push(b'\n');
                Ok(out)
            }
        }
    }
}

/// Header shared by every file of a run.
pub fn provenance(cfg: &RunConfig) -> Meta {
    let mut m = Meta::new();
    m.insert("artifact".into(), json!("nahn"));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("command".into(), json!(cfg.command.name()));
    m.insert("config_sha256".into(), json!(cfg.config_hash()));
    m.insert("kpoints".into(), json!(cfg.kpoints));
    m.insert("tolerances".into(), cfg.tolerances());
    m
}

/// A JSON report: the provenance block next to `body`.
pub fn render_report(meta: &Meta, body: Value) -> Result<Vec<u8>, CliError> {
    let doc = json!({ "provenance": meta, "report": body });
    let mut out = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Output(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// `dir/stem.<suffix>` next to the main output file.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::Output(format!("cannot write {}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(fail)?;
    }
    std::fs::write(path, bytes).map_err(fail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::f64::consts::PI] {
            assert_eq!(sci(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(sci(1.0), "1.0000000000000000e0");
    }

    fn sample() -> (Table, Meta) {
        let mut t = Table::new(&["index", "re_E", "im_E"]);
        t.push(vec![0usize.into(), 1.0.into(), (-0.5).into()]);
        t.push(vec![1usize.into(), f64::NAN.into(), 0.0.into()]);
        let mut m = Meta::new();
        m.insert("seed".into(), json!(7));
        (t, m)
    }

    #[test]
    fn csv_layout() {
        let (t, m) = sample();
        let text = String::from_utf8(t.render(&m, Format::Csv).unwrap()).unwrap();
        assert_eq!(
            text,
            "# seed: 7\nindex,re_E,im_E\n0,1.0000000000000000e0,-5.0000000000000000e-1\n1,NaN,0.0000000000000000e0\n"
        );
    }

    #[test]
    fn json_layout() {
        let (t, m) = sample();
        let v: Value = serde_json::from_slice(&t.render(&m, Format::Json).unwrap()).unwrap();
        assert_eq!(v["provenance"]["seed"], 7);
        assert_eq!(v["columns"][1], "re_E");
        assert_eq!(v["rows"][0][2], -0.5);
        assert!(v["rows"][1][1].is_null());
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(
            sibling(Path::new("out/fig.csv"), "report.json"),
            PathBuf::from("out/fig.report.json")
        );
        assert_eq!(
            sibling(Path::new("fig"), "eigenstates.csv"),
            PathBuf::from("fig.eigenstates.csv")
        );
    }
}
