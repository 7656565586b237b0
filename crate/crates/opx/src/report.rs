//! CSV and JSON rendering of a finished run.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Everything a subcommand produces. `result` carries the serialized domain
/// value for JSON output; `columns`/`rows` are the CSV table.
#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub config: Vec<(String, Value)>,
    pub summary: Vec<(String, Value)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub result: Value,
}

impl Report {
    pub fn new(command: impl Into<String>, result: impl Serialize) -> Result<Self, CliError> {
        Ok(Report {
            command: command.into(),
            config: Vec::new(),
            summary: Vec::new(),
            columns: Vec::new(),
            rows: Vec::new(),
            result: serde_json::to_value(result)?,
        })
    }

    pub fn columns(mut self, cols: &[&str]) -> Self {
        self.columns = cols.iter().map(|c| c.to_string()).collect();
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn summary(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.summary.push((key.to_string(), v));
    }

    /// Flattens a serializable argument struct into config entries.
    pub fn echo(&mut self, args: impl Serialize) -> Result<(), CliError> {
        if let Value::Object(m) = serde_json::to_value(args)? {
            for (k, v) in m {
                if !v.is_null() {
                    self.config.push((k, v));
                }
            }
        }
        Ok(())
    }

    pub fn render(&self, format: Format, wall_time: Option<f64>) -> Result<String, CliError> {
        match format {
            Format::Csv => self.render_csv(wall_time),
            Format::Json => self.render_json(wall_time),
        }
    }

    fn render_csv(&self, wall_time: Option<f64>) -> Result<String, CliError> {
        let mut out = format!("# opx {}\n", self.command);
        for (k, v) in &self.config {
            out.push_str(&format!("# {k}={}\n", plain(v)));
        }
        for (k, v) in &self.summary {
            out.push_str(&format!("# {k}={}\n", plain(v)));
        }
        if let Some(w) = wall_time {
            out.push_str(&format!("# wall_time_s={w:.3}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        out.push_str(&String::from_utf8_lossy(&bytes));
        Ok(out)
    }

    fn render_json(&self, wall_time: Option<f64>) -> Result<String, CliError> {
        let mut top = Map::new();
        top.insert("command".into(), Value::String(self.command.clone()));
        top.insert("config".into(), Value::Object(self.config.iter().cloned().collect()));
        top.insert("result".into(), self.result.clone());
        top.insert("summary".into(), Value::Object(self.summary.iter().cloned().collect()));
        if let Some(w) = wall_time {
            top.insert("wall_time_s".into(), Value::from(w));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(top))?;
        s.push('\n');
        Ok(s)
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(plain).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

/// Shortest round-trip decimal for an f64.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
