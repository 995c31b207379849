//! Table and report writers. Every value is formatted once and feeds both
//! the CSV and the JSON writer, so the two formats always carry identical
//! numbers.

use std::path::{Path, PathBuf};

use capmkit::numfmt::format_sig;
use serde_json::{json, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Paper-style table cell: fixed 4 decimal places.
pub fn table_num(x: f64) -> String {
    format!("{x:.4}")
}

/// Data cell for plot-ready CSVs: 10 significant digits.
pub fn data_num(x: f64) -> String {
    format_sig(x, 10)
}

/// JSON value carrying exactly the digits the CSV shows. Non-finite values
/// become strings since JSON has no representation for them.
pub fn json_num(formatted: &str) -> Value {
    match formatted.parse::<f64>() {
        Ok(v) if v.is_finite() => json!(v),
        _ => json!(formatted),
    }
}

/// One output table: a header row plus string cells, written as CSV or as an
/// array of objects keyed by `field_names`.
pub struct Table {
    /// CSV header cells (the paper's column names).
    pub headers: Vec<&'static str>,
    /// JSON object keys, parallel to `headers`.
    pub field_names: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.headers.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (name, cell) in self.field_names.iter().zip(row) {
                    obj.insert((*name).to_string(), json_num(cell));
                }
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

/// Write a table under `dir/name.{csv,json}` according to the format.
pub fn write_table(
    dir: &Path,
    name: &str,
    table: &Table,
    format: OutputFormat,
) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("{name}.{}", format.extension()));
    let content = match format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(&table.to_json())
                .map_err(|e| CliError::Io(e.to_string()))?;
            text.push('\n');
            text
        }
    };
    std::fs::write(&path, content)?;
    Ok(path)
}

/// Write an arbitrary JSON document (used when the format is json) or a
/// key,value CSV fallback.
pub fn write_json_value(dir: &Path, name: &str, value: &Value) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("{name}.json"));
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}
