//! Run manifests and deterministic CSV/JSON writers.

use crate::params::Tolerances;
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Value,
    pub tolerances: Tolerances,
    pub seed_grid: Value,
    pub library_version: String,
    /// seconds since the Unix epoch; `SOURCE_DATE_EPOCH` when set
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command: &str, params: Value, tolerances: Tolerances, seed_grid: Value) -> Self {
        RunManifest {
            command: command.to_string(),
            params,
            tolerances,
            seed_grid,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: timestamp(),
        }
    }
}

fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.trim().parse().ok()) {
        return t;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// 17 significant digits, exponent form.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => fmt_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: vec![] }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.iter().map(Cell::render).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

pub fn json_document(manifest: &RunManifest, results: &impl Serialize) -> String {
    let doc = json!({ "manifest": manifest, "results": results });
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// CSV to `out` with the manifest in a sidecar file, or CSV to stdout with
/// the manifest on stderr.
pub fn write_csv(table: &Table, manifest: &RunManifest, out: Option<&Path>) -> std::io::Result<()> {
    let body = table.to_csv();
    let m = serde_json::to_string_pretty(manifest).expect("serializable") + "\n";
    match out {
        Some(p) => {
            std::fs::write(p, body)?;
            std::fs::write(sidecar_path(p), m)
        }
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            std::io::stderr().write_all(m.as_bytes())
        }
    }
}

pub fn write_json(text: &str, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}
