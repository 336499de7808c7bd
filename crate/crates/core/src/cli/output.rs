//! Result bundles: a JSON summary plus CSV tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Deterministic text form of a float: plain decimals in [1e-4, 1e6), exponent form otherwise.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if !x.is_finite() {
        format!("{x}")
    } else if (1e-4..1e6).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    /// Column names carry their unit suffix.
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// |value − target| ≤ tolerance
    pub fn near(name: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, target, tolerance, pass: (value - target).abs() <= tolerance }
    }

    /// value ≥ target − tolerance
    pub fn at_least(name: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, target, tolerance, pass: value >= target - tolerance }
    }

    /// value ≤ target + tolerance
    pub fn at_most(name: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, target, tolerance, pass: value <= target + tolerance }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Check { name: name.into(), value: ok as u8 as f64, target: 1.0, tolerance: 0.0, pass: ok }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultBundle {
    pub kind: String,
    pub config_sha256: String,
    pub seed: u64,
    pub metrics: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
}

impl ResultBundle {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn summary(&self) -> Value {
        json!({
            "kind": self.kind,
            "provenance": {
                "config_sha256": self.config_sha256,
                "seed": self.seed,
                "version": env!("CARGO_PKG_VERSION"),
            },
            "metrics": self.metrics,
            "checks": self.checks,
            "all_checks_pass": self.all_pass(),
            "tables": self.tables.iter().map(|t| t.file_name()).collect::<Vec<_>>(),
        })
    }

    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.summary()).expect("summary serializes");
        s.push('\n');
        s
    }

    /// Writes summary.json and one CSV per table; returns the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let mut out = Vec::new();
        let p = dir.join("summary.json");
        std::fs::write(&p, self.summary_json())?;
        out.push(p);
        for t in &self.tables {
            let p = dir.join(t.file_name());
            std::fs::write(&p, t.to_csv())?;
            out.push(p);
        }
        Ok(out)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest.iter() {
        write!(s, "{b:02x}").expect("string write");
    }
    s
}
