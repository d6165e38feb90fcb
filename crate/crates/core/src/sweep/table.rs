//! CSV tables with a `# key = value` preamble.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::schema::{columns, summary_columns};
use super::SweepKind;
use crate::error::{Error, Result};
use crate::VERSION;

/// Format revision of the CSV layout.
pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    /// Ordered `key = value` pairs, starting with `kind`, `table`, `version`, `schema`.
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Set by [`read_table`] when the file was written by another version.
    pub version_mismatch: bool,
}

impl ResultTable {
    pub(crate) fn new(kind: SweepKind, summary: bool, header: &[&str]) -> Self {
        let table = if summary { "summary" } else { "main" };
        Self {
            metadata: vec![
                ("kind".into(), kind.as_str().into()),
                ("table".into(), table.into()),
                ("version".into(), VERSION.into()),
                ("schema".into(), SCHEMA.to_string()),
            ],
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            version_mismatch: false,
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// All values of a column, or `None` if it is absent.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn kind(&self) -> Option<SweepKind> {
        self.meta("kind")?.parse().ok()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Writes `table` to `path`, creating parent directories.
pub fn write_table(table: &ResultTable, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, table.to_csv())?;
    Ok(())
}

pub fn read_table(path: &Path) -> Result<ResultTable> {
    parse_table(&fs::read_to_string(path)?, path)
}

fn parse_err(path: &Path, line: usize, column: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: PathBuf::from(path),
        line,
        column,
        msg: msg.into(),
    }
}

/// Parses CSV text; `path` is only used in error messages.
pub fn parse_table(text: &str, path: &Path) -> Result<ResultTable> {
    let mut metadata = Vec::new();
    let mut header: Option<(usize, Vec<String>)> = None;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if let Some(rest) = line.strip_prefix('#') {
            if header.is_some() {
                return Err(parse_err(path, lineno, 1, "metadata line after the header"));
            }
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| parse_err(path, lineno, 2, "metadata line lacks '='"))?;
            metadata.push((k.trim().to_string(), v.trim().to_string()));
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let Some((_, names)) = &header else {
            header = Some((lineno, line.split(',').map(|s| s.trim().to_string()).collect()));
            continue;
        };
        let mut row = Vec::with_capacity(names.len());
        let mut col = 1;
        for cell in line.split(',') {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| parse_err(path, lineno, col, format!("'{cell}' is not a number")))?;
            row.push(v);
            col += cell.len() + 1;
        }
        if row.len() != names.len() {
            return Err(parse_err(
                path,
                lineno,
                1,
                format!("row has {} fields, header has {}", row.len(), names.len()),
            ));
        }
        rows.push(row);
    }
    let (header_line, header) = header.ok_or_else(|| parse_err(path, 1, 1, "no header row"))?;

    let table = ResultTable {
        version_mismatch: false,
        metadata,
        header,
        rows,
    };
    if let Some(kind) = table.kind() {
        let expected = if table.meta("table") == Some("summary") {
            summary_columns(kind).unwrap_or_default()
        } else {
            columns(kind)
        };
        let missing: Vec<&str> = expected
            .iter()
            .copied()
            .filter(|c| table.column_index(c).is_none())
            .collect();
        if !missing.is_empty() {
            return Err(parse_err(
                path,
                header_line,
                1,
                format!("missing column(s) for kind {}: {}", kind.as_str(), missing.join(", ")),
            ));
        }
    }
    let version_mismatch = table.meta("version") != Some(VERSION);
    Ok(ResultTable {
        version_mismatch,
        ..table
    })
}
