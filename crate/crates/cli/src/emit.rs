use std::fs;
use std::path::{Path, PathBuf};

use cavicool::params::{classify_regime, derive, DerivedParams, Regime, SystemParams};
use serde::Serialize;

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()
    }
}

#[derive(Serialize)]
pub struct SetEcho {
    pub index: usize,
    pub params: SystemParams,
    pub derived: DerivedParams,
    pub regime: Regime,
}

impl SetEcho {
    pub fn new(index: usize, p: &SystemParams) -> Self {
        Self { index, params: *p, derived: derive(p), regime: classify_regime(p) }
    }
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub preset: Option<&'a str>,
    /// Frequencies are in units of the trap frequency.
    pub units: &'static str,
    pub options: serde_json::Value,
    pub sets: Vec<SetEcho>,
    pub flags: serde_json::Value,
    pub files: Vec<String>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    s.push('\n');
    fs::write(path, s)
}

pub struct OutDir(pub PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(path)?;
        Ok(Self(path.to_path_buf()))
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}
