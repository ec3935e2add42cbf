//! Tabular results and their CSV / JSON encodings.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value as Json};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    /// A cell with no value for this row.
    Empty,
    Text(String),
    Int(u64),
    Num(f64),
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v)
    }
}

impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::Int(v as u64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl Value {
    /// Locale-independent, six significant digits for reals.
    fn to_csv(&self) -> String {
        match self {
            Value::Empty => String::new(),
            Value::Text(s) => s.clone(),
            Value::Int(v) => v.to_string(),
            Value::Num(v) if v.is_finite() => format!("{v:.5e}"),
            Value::Num(v) => v.to_string(),
        }
    }

    fn to_json(&self) -> Json {
        match self {
            Value::Empty => Json::Null,
            Value::Text(s) => Json::String(s.clone()),
            Value::Int(v) => Json::from(*v),
            Value::Num(v) => serde_json::Number::from_f64(*v).map_or(Json::Null, Json::Number),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Eval(format!("csv encoding failed: {e}"));
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Value::to_csv)).map_err(io)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Eval(format!("csv encoding failed: {e}")))
    }

    /// An array of objects keyed by column name; reals keep full precision.
    fn to_json(&self) -> Result<Vec<u8>, CliError> {
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Json> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(row.iter().map(Value::to_json))
                    .collect();
                Json::Object(obj)
            })
            .collect();
        let mut out = serde_json::to_vec_pretty(&rows)
            .map_err(|e| CliError::Eval(format!("json encoding failed: {e}")))?;
        out.push(b'\n');
        Ok(out)
    }
}

/// Writes `bytes` to `path` through a sibling temporary file and a rename, so
/// a failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::Config(format!("cannot write {}: {e}", path.display()));
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Config(format!("output path {} has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = std::fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(bytes).and_then(|_| f.sync_all()))
        .and_then(|_| std::fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(fail(e));
    }
    Ok(())
}
