use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

/// Bumped whenever a column order or JSON field changes; see docs/schemas.md.
pub const SCHEMA: &str = "semitoric-lab/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Tabular result of one subcommand plus the config that produced it.
#[derive(Debug)]
pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub summary: Map<String, Value>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub svg: Option<String>,
    /// Set when a verification inside the command did not pass.
    pub failure: Option<String>,
}

impl Report {
    pub fn new(command: &'static str, config: Value, columns: Vec<&'static str>) -> Self {
        Report {
            command,
            config,
            summary: Map::new(),
            columns,
            rows: Vec::new(),
            svg: None,
            failure: None,
        }
    }

    pub fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    schema: &'a str,
    command: &'a str,
    config: &'a Value,
    summary: &'a Map<String, Value>,
    columns: &'a [&'static str],
    rows: &'a [Vec<Value>],
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn render_csv(r: &Report) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    writeln!(buf, "# {SCHEMA} {} {}", r.command, r.config)?;
    for (k, v) in &r.summary {
        writeln!(buf, "# {k}={v}")?;
    }
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(&r.columns)
        .map_err(|e| CliError::Io(e.into()))?;
    for row in &r.rows {
        w.write_record(row.iter().map(cell))
            .map_err(|e| CliError::Io(e.into()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

pub fn render_json(r: &Report) -> Result<Vec<u8>, CliError> {
    let doc = JsonDoc {
        schema: SCHEMA,
        command: r.command,
        config: &r.config,
        summary: &r.summary,
        columns: &r.columns,
        rows: &r.rows,
    };
    let mut out = serde_json::to_vec(&doc).map_err(|e| CliError::Io(e.into()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn render(r: &Report, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => render_csv(r),
        Format::Json => render_json(r),
        Format::Svg => r
            .svg
            .clone()
            .map(String::into_bytes)
            .ok_or_else(|| CliError::Usage(format!("{} has no SVG output", r.command))),
    }
}

pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(bytes).and_then(|_| stdout.flush()) {
                // A closed pipe (e.g. `| head`) is not an error.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
    }
    Ok(())
}
