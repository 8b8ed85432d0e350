//! Result files. Every write goes to a temp file in the target directory
//! and is renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// 17 significant digits in scientific notation.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(&path).map_err(|e| CliError::Io(e.error))?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(dir, name, &bytes)
}

pub fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    write_atomic(dir, name, &bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub tag: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(tag: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            tag: tag.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub command: String,
    pub status: String,
    pub failed: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_convention: Option<i32>,
    pub checks: Vec<Check>,
}

impl Summary {
    pub fn new(command: &str, checks: Vec<Check>, sign_convention: Option<i32>) -> Self {
        let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| c.tag.clone()).collect();
        Self {
            command: command.into(),
            status: if failed.is_empty() { "pass" } else { "fail" }.into(),
            failed,
            sign_convention,
            checks,
        }
    }

    /// Writes summary.json and turns failures into a tolerance error.
    pub fn finish(self, dir: &Path) -> Result<(), CliError> {
        write_json(dir, "summary.json", &self)?;
        for c in &self.checks {
            println!("{:<20} {}  {}", c.tag, if c.pass { "PASS" } else { "FAIL" }, c.detail);
        }
        if self.failed.is_empty() {
            Ok(())
        } else {
            Err(CliError::Tolerance(self.failed))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_carry_17_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
        assert_eq!(opt_num(None), "");
    }

    #[test]
    fn files_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_csv(dir.path(), "a.csv", &["x", "y"], &[vec![num(1.0), num(2.0)]]).unwrap();
        let text = std::fs::read_to_string(p).unwrap();
        assert_eq!(text.lines().count(), 2);
        let s = Summary::new("t", vec![Check::new("k", false, "")], None);
        assert!(matches!(s.finish(dir.path()), Err(CliError::Tolerance(_))));
        assert!(dir.path().join("summary.json").exists());
    }
}
