//! Report envelope and its JSON and CSV encodings.
//!
//! Everything except the trailing `timestamp` object is a pure function of
//! the echoed inputs.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::config::Format;
use crate::CliError;

pub const TOOL: &str = "rdsim";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Quantity compared against `limit`, when the check is numeric.
    pub measured: Option<f64>,
    pub limit: Option<f64>,
    pub detail: String,
}

impl Check {
    /// Passes when `measured <= limit`.
    pub fn at_most(name: impl Into<String>, measured: f64, limit: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass: measured <= limit,
            measured: Some(measured),
            limit: Some(limit),
            detail: detail.into(),
        }
    }

    pub fn flag(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            measured: None,
            limit: None,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timestamp {
    pub utc: String,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub kind: String,
    pub inputs: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    pub pass: bool,
    /// Must stay the last field: consumers strip it to compare runs.
    pub timestamp: Timestamp,
}

impl Report {
    pub fn new(kind: &str, inputs: Value, results: impl Serialize, checks: Vec<Check>, started: std::time::Instant) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            kind: kind.to_string(),
            inputs,
            results: serde_json::to_value(results).expect("results serialize"),
            checks,
            pass,
            timestamp: Timestamp {
                utc: chrono::Utc::now().format("%Y-%m-%dT%H:%M:%S%.3fZ").to_string(),
                wall_time_s: started.elapsed().as_secs_f64(),
            },
        }
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Long-format table `section,path,value`, one row per scalar leaf.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut rows = Vec::new();
        if let Value::Object(map) = &value {
            for (section, v) in map {
                flatten(section, "", v, &mut rows);
            }
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(["section", "path", "value"]).map_err(io)?;
        for r in &rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }
}

fn flatten(section: &str, path: &str, v: &Value, rows: &mut Vec<[String; 3]>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                flatten(section, &p, x, rows);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(section, &format!("{path}[{i}]"), x, rows);
            }
        }
        Value::Null => rows.push([section.into(), path.into(), String::new()]),
        Value::String(s) => rows.push([section.into(), path.into(), s.clone()]),
        other => rows.push([section.into(), path.into(), other.to_string()]),
    }
}

/// Text before the timestamp, which is all that must match between runs.
pub fn deterministic_part(rendered: &str) -> &str {
    let cut = rendered
        .find("\"timestamp\":")
        .or_else(|| rendered.find("\r\ntimestamp,"))
        .unwrap_or(rendered.len());
    &rendered[..cut]
}

pub fn write_output(text: &str, path: Option<&std::path::Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report::new(
            "demo",
            serde_json::json!({"seed": 1}),
            serde_json::json!({"name": "a,\"b\"", "xs": [1.5, 2], "none": null}),
            vec![Check::at_most("small", 0.5, 1.0, "")],
            std::time::Instant::now(),
        )
    }

    #[test]
    fn csv_quotes_per_rfc4180() {
        let csv = sample().to_csv().unwrap();
        assert!(csv.starts_with("section,path,value\r\n"));
        assert!(csv.contains("results,name,\"a,\"\"b\"\"\"\r\n"));
        assert!(csv.contains("results,xs[1],2\r\n"));
        assert!(csv.contains("results,none,\r\n"));
    }

    #[test]
    fn timestamp_is_the_tail() {
        let r = sample();
        for text in [r.to_json(), r.to_csv().unwrap()] {
            let head = deterministic_part(&text);
            assert!(!head.contains("wall_time_s") && head.len() < text.len());
        }
        assert!(r.pass);
    }
}
