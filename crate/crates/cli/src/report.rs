use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    /// Empty cell in CSV, `null` in JSON.
    Null,
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            // 17 significant digits round-trip every f64; −0 prints as 0
            Value::Float(x) => format!("{:.16e}", if *x == 0.0 { 0.0 } else { *x }),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Value::Text(s) => s.clone(),
            Value::Null => String::new(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Int(i) => Json::from(*i),
            Value::Float(x) => serde_json::Number::from_f64(*x).map_or(Json::Null, Json::Number),
            Value::Bool(b) => Json::Bool(*b),
            Value::Text(s) => Json::String(s.clone()),
            Value::Null => Json::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_columns(name: &str, columns: Vec<String>) -> Self {
        Self { name: name.into(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    fn csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Value::csv).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    fn json(&self) -> Json {
        Json::Array(
            self.rows
                .iter()
                .map(|r| Json::Object(self.columns.iter().cloned().zip(r.iter().map(Value::json)).collect()))
                .collect(),
        )
    }
}

/// Named tables produced by one command.
pub type Report = Vec<Table>;

fn sibling(path: &Path, name: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let file = match path.extension() {
        Some(ext) => format!("{stem}.{name}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{name}"),
    };
    path.with_file_name(file)
}

fn render_json(report: &Report) -> String {
    let map: Map<String, Json> = report.iter().map(|t| (t.name.clone(), t.json())).collect();
    let mut s = serde_json::to_string_pretty(&Json::Object(map)).expect("tables serialise");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Emits the report and returns the files written. With `--out` and CSV,
/// the first table goes to the given path and every further table to
/// `<stem>.<table>.<ext>` beside it.
pub fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<Vec<PathBuf>, CliError> {
    match (format, out) {
        (Format::Json, None) => {
            print!("{}", render_json(report));
            Ok(Vec::new())
        }
        (Format::Json, Some(p)) => {
            write_file(p, &render_json(report))?;
            Ok(vec![p.to_path_buf()])
        }
        (Format::Csv, None) => {
            let mut s = String::new();
            for (i, t) in report.iter().enumerate() {
                if report.len() > 1 {
                    if i > 0 {
                        s.push('\n');
                    }
                    let _ = writeln!(s, "# {}", t.name);
                }
                s.push_str(&t.csv());
            }
            print!("{s}");
            Ok(Vec::new())
        }
        (Format::Csv, Some(p)) => {
            let mut written = Vec::new();
            for (i, t) in report.iter().enumerate() {
                let path = if i == 0 { p.to_path_buf() } else { sibling(p, &t.name) };
                write_file(&path, &t.csv())?;
                written.push(path);
            }
            Ok(written)
        }
    }
}
