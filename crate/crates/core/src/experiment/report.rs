use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Git-style content hash: SHA-256 of `"blob <len>\0" + content`, in hex.
pub fn config_hash(content: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("blob {}\0", content.len()).as_bytes());
    hasher.update(content.as_bytes());
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Formats a float identically on every run and platform.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.12e}")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, n: usize, values: &[f64]) {
        let mut row = vec![n.to_string()];
        row.extend(values.iter().map(|v| fmt_float(*v)));
        self.push(row);
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// One pass/fail criterion with its pinned bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub passed: bool,
}

impl Check {
    /// `lo <= value <= hi`.
    pub fn within(label: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            label: label.into(),
            value,
            lo,
            hi,
            passed: value >= lo && value <= hi,
        }
    }

    pub fn near(label: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self::within(label, value, target - tol, target + tol)
    }

    pub fn below(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            label: label.into(),
            value,
            lo: f64::NEG_INFINITY,
            hi: bound,
            passed: value < bound,
        }
    }

    pub fn above(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            label: label.into(),
            value,
            lo: bound,
            hi: f64::INFINITY,
            passed: value > bound,
        }
    }

    pub fn flag(label: impl Into<String>, ok: bool) -> Self {
        Check {
            label: label.into(),
            value: if ok { 1.0 } else { 0.0 },
            lo: 1.0,
            hi: 1.0,
            passed: ok,
        }
    }

    pub fn describe(&self) -> String {
        let status = if self.passed { "ok" } else { "FAILED" };
        let range = match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) if self.lo == self.hi => format!("= {}", self.lo),
            (true, true) => format!("in [{:.4}, {:.4}]", self.lo, self.hi),
            (false, true) => format!("< {:e}", self.hi),
            (true, false) => format!("> {}", self.lo),
            (false, false) => "unbounded".into(),
        };
        let value = if self.value != 0.0 && self.value.abs() < 1e-3 {
            format!("{:.3e}", self.value)
        } else {
            format!("{:.6}", self.value)
        };
        format!("{}: {value} (want {range}) {status}", self.label)
    }
}

/// Result of one experiment: the canonical table, the summary values and the
/// checks.
#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: String,
    pub module: String,
    pub table: Table,
    pub summary: serde_json::Map<String, serde_json::Value>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn new(id: impl Into<String>, module: impl Into<String>, table: Table) -> Self {
        Outcome {
            id: id.into(),
            module: module.into(),
            table,
            summary: serde_json::Map::new(),
            checks: Vec::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(
            key.to_string(),
            serde_json::to_value(value).unwrap_or(serde_json::Value::Null),
        );
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Writes `<dir>/<id>.csv` and the `<dir>/<id>.json` sidecar, returning both paths.
    pub fn write(&self, dir: &Path, config_text: &str, config_echo: serde_json::Value) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.id));
        let json_path = dir.join(format!("{}.json", self.id));
        self.table.write_csv(std::fs::File::create(&csv_path)?)?;
        let sidecar = serde_json::json!({
            "id": self.id,
            "module": self.module,
            "config": config_echo,
            "config_hash": config_hash(config_text),
            "summary": self.summary,
            "checks": self.checks,
            "passed": self.passed(),
        });
        let mut text = serde_json::to_string_pretty(&sidecar)?;
        text.push('\n');
        std::fs::write(&json_path, text)?;
        Ok((csv_path, json_path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_matches_git_blob_construction() {
        // same framing as `git hash-object`, with SHA-256 instead of SHA-1
        let mut hasher = Sha256::new();
        hasher.update(b"blob 6\0hello\n");
        let expect: String = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(config_hash("hello\n"), expect);
        assert_ne!(config_hash("a"), config_hash("b"));
    }

    #[test]
    fn checks() {
        assert!(Check::within("x", 1.0, 0.5, 1.5).passed);
        assert!(!Check::near("x", 1.3, 1.0, 0.2).passed);
        assert!(Check::below("x", 1e-9, 1e-8).passed);
        assert!(!Check::above("x", 0.3, 0.4).passed);
    }

    #[test]
    fn table_csv() {
        let mut t = Table::new(["n", "value"]);
        t.push_numbers(0, &[0.5]);
        assert_eq!(t.to_csv_string().unwrap(), "n,value\n0,5.000000000000e-1\n");
    }
}
