//! CSV tables and the run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Floats use 9 significant digits so identical runs give identical bytes.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.8e}")
    }
}

pub enum Cell {
    F(f64),
    I(i64),
    B(bool),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) => fmt_f64(*v),
            Cell::I(v) => v.to_string(),
            Cell::B(v) => v.to_string(),
            Cell::S(v) => v.clone(),
        }
    }
}

pub struct Table {
    pub columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn render(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub columns: Vec<String>,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// sha256 over the command name, the resolved scenario and the raw input files.
    pub input_digest: String,
    pub timestamp: String,
    pub seed: u64,
    pub threads: Option<usize>,
    pub outputs: Vec<OutputFile>,
}

pub fn input_digest(command: &str, resolved_scenario: &str, sources: &[(String, String)]) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0]);
    h.update(resolved_scenario.as_bytes());
    for (_, text) in sources {
        h.update([0]);
        h.update(text.as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects output files under a common prefix and writes the manifest last.
pub struct Writer {
    prefix: String,
    pub manifest: RunManifest,
}

impl Writer {
    pub fn new(prefix: String, manifest: RunManifest) -> Result<Self, CliError> {
        let dir = Path::new(&prefix);
        let parent = if prefix.ends_with('/') { Some(dir) } else { dir.parent() };
        if let Some(p) = parent.filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        }
        Ok(Writer { prefix, manifest })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        PathBuf::from(format!("{}{name}", self.prefix))
    }

    fn write(&mut self, name: &str, text: &str, columns: Vec<String>, rows: usize) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.manifest.outputs.push(OutputFile { path: path.clone(), columns, rows });
        Ok(path)
    }

    pub fn table(&mut self, name: &str, table: &Table) -> Result<PathBuf, CliError> {
        self.write(name, &table.render(), table.columns.clone(), table.len())
    }

    /// Pre-rendered CSV (header line + rows).
    pub fn csv(&mut self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        let columns = text.lines().next().unwrap_or("").split(',').map(String::from).collect();
        let rows = text.lines().count().saturating_sub(1);
        self.write(name, text, columns, rows)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))? + "\n";
        self.write(name, &text, Vec::new(), 0)
    }

    pub fn finish(self) -> Result<PathBuf, CliError> {
        let path = self.path("manifest.json");
        let text = serde_json::to_string_pretty(&self.manifest).map_err(|e| CliError::Io(e.to_string()))? + "\n";
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_f64(1.0 / 3.0), "3.33333333e-1");
        assert_eq!(fmt_f64(-1500.0), "-1.50000000e3");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn digest_depends_on_every_input() {
        let a = input_digest("gate", "x", &[("f".into(), "1".into())]);
        assert_eq!(a, input_digest("gate", "x", &[("g".into(), "1".into())]));
        assert_ne!(a, input_digest("gate", "x", &[("f".into(), "2".into())]));
        assert_ne!(a, input_digest("evolve", "x", &[("f".into(), "1".into())]));
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn table_render() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![Cell::I(1), Cell::F(0.5), Cell::B(true)]);
        assert_eq!(t.render(), "a,b,c\n1,5.00000000e-1,true\n");
    }
}
