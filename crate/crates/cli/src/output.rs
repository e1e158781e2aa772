//! Output documents: a header block (tool versions and the effective
//! configuration) followed by the result, as JSON or CSV.

use std::io::Write;

use serde_json::{json, Value};

use qpi_core::{Error, Result};

use crate::{Cli, Format};

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct Report {
    pub result: Value,
    pub table: Option<Table>,
    /// Set when a check ran to completion but did not pass.
    pub failure: Option<String>,
}

impl Report {
    pub fn json(result: Value) -> Self {
        Report { result, table: None, failure: None }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn failing_unless(mut self, pass: bool, what: impl Into<String>) -> Self {
        if !pass {
            self.failure = Some(what.into());
        }
        self
    }
}

pub fn header(cli: &Cli) -> Value {
    json!({
        "tool": "qpi",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": qpi_core::VERSION,
        "config": serde_json::to_value(cli).expect("config serializes"),
    })
}

pub fn render(cli: &Cli, report: &Report) -> Result<Vec<u8>> {
    let header = header(cli);
    match cli.global.format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(&json!({ "header": header, "result": report.result }))
                .expect("values serialize");
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => {
            let table = report
                .table
                .as_ref()
                .ok_or_else(|| Error::Parameter("this mode has no CSV form; use --format json".into()))?;
            let mut bytes = format!("# {header}\n").into_bytes();
            let mut w = csv::Writer::from_writer(&mut bytes);
            let io = |e: csv::Error| Error::Parameter(format!("csv: {e}"));
            w.write_record(&table.columns).map_err(io)?;
            for row in &table.rows {
                w.write_record(row).map_err(io)?;
            }
            w.flush().map_err(|e| Error::Parameter(format!("csv: {e}")))?;
            drop(w);
            Ok(bytes)
        }
    }
}

pub fn emit(cli: &Cli, report: &Report) -> Result<()> {
    let bytes = render(cli, report)?;
    let io = |e: std::io::Error| Error::Parameter(format!("cannot write output: {e}"));
    match &cli.global.out {
        Some(path) => std::fs::write(path, bytes).map_err(io),
        None => std::io::stdout().lock().write_all(&bytes).map_err(io),
    }
}
