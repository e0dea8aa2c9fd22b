//! Tabular artifacts: `#`-commented CSV or a `{"meta", "rows"}` JSON object
//! with column-oriented rows, written through a temporary file and renamed
//! into place.

use std::io::{self, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map};

use crate::args::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    Missing,
}

impl Value {
    /// CSV cell text. Floats use 17 significant digits so they parse back to
    /// the identical `f64`.
    pub fn render(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Float(x) => format_float(*x),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => s.clone(),
            Value::Missing => String::new(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Int(i) => json!(i),
            Value::Float(x) if x.is_finite() => json!(x),
            Value::Float(_) | Value::Missing => serde_json::Value::Null,
            Value::Bool(b) => json!(b),
            Value::Text(s) => json!(s),
        }
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<u32> for Value {
    fn from(x: u32) -> Self {
        Value::Int(x.into())
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Bool(x)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Text(x.to_string())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Text(x)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(x: Option<T>) -> Self {
        x.map_or(Value::Missing, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub command: &'static str,
    pub meta: Vec<(String, Value)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Artifact {
    pub fn new(command: &'static str, columns: Vec<&'static str>) -> Self {
        Self { command, meta: Vec::new(), columns, rows: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) {
        self.meta.push((key.to_string(), value.into()));
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn header(&self, timestamp: bool) -> Vec<(String, Value)> {
        let mut h = vec![
            ("generator".to_string(), Value::from(concat!("threemode ", env!("CARGO_PKG_VERSION")))),
            ("command".to_string(), Value::from(self.command)),
        ];
        h.extend(self.meta.iter().cloned());
        if timestamp {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
            h.push(("generated_unix".to_string(), Value::Int(secs as i64)));
        }
        h
    }

    pub fn to_csv(&self, timestamp: bool) -> io::Result<Vec<u8>> {
        let mut buf = Vec::new();
        for (k, v) in self.header(timestamp) {
            writeln!(buf, "# {k}: {}", v.render().replace('\n', " "))?;
        }
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Value::render))?;
        }
        w.into_inner().map_err(|e| e.into_error())
    }

    pub fn to_json(&self, timestamp: bool) -> io::Result<Vec<u8>> {
        let meta: Map<String, serde_json::Value> =
            self.header(timestamp).into_iter().map(|(k, v)| (k, v.to_json())).collect();
        let rows: Map<String, serde_json::Value> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| (c.to_string(), self.rows.iter().map(|r| r[i].to_json()).collect()))
            .collect();
        let mut out = serde_json::to_vec_pretty(&json!({ "meta": meta, "rows": rows }))?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn render(&self, format: Format, timestamp: bool) -> io::Result<Vec<u8>> {
        match format {
            Format::Csv => self.to_csv(timestamp),
            Format::Json => self.to_json(timestamp),
        }
    }
}

/// Writes `bytes` to `path` via a sibling temporary file and a rename, or to
/// standard output when no path is given.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> io::Result<()> {
    let Some(path) = path else {
        let mut out = io::stdout().lock();
        out.write_all(bytes)?;
        return out.flush();
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
