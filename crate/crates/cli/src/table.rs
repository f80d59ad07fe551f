use std::path::Path;

use anyhow::Context;
use serde_json::{Map, Value};

use crate::config::ReportFormat;

/// A rectangular report that can be written as CSV or as a JSON array of
/// row objects.
pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    /// Writes `<dir>/<stem>.csv` or `<dir>/<stem>.json`.
    pub fn write(&self, dir: &Path, stem: &str, format: ReportFormat) -> anyhow::Result<()> {
        let path = dir.join(match format {
            ReportFormat::Csv => format!("{stem}.csv"),
            ReportFormat::Json => format!("{stem}.json"),
        });
        let bytes = match format {
            ReportFormat::Csv => self.to_csv()?,
            ReportFormat::Json => self.to_json().into_bytes(),
        };
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
    }

    fn to_csv(&self) -> anyhow::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell))?;
        }
        Ok(w.into_inner()?)
    }

    fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .headers
                    .iter()
                    .cloned()
                    .zip(row.iter().cloned())
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("rows serialize");
        s.push('\n');
        s
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// JSON number for finite values, null otherwise.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn write_json(dir: &Path, name: &str, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let path = dir.join(name);
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(&path, s).with_context(|| format!("writing {}", path.display()))
}
