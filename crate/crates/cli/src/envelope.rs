//! Output envelope shared by every subcommand: a schema-versioned header,
//! the echoed configuration, tabular rows, and warnings. CSV renders the
//! header as `#` comments with 12 significant digits; JSON is the envelope
//! verbatim (serde's shortest round-trip float encoding).

use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(v) => json!(v),
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.12e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }
}

/// One output row: ordered (column, value) pairs.
pub type Row = Vec<(&'static str, Cell)>;

#[derive(Debug, Clone)]
pub struct OutputEnvelope {
    pub command: String,
    pub config_echo: Vec<(String, String)>,
    pub rows: Vec<Row>,
    pub warnings: Vec<String>,
}

impl OutputEnvelope {
    pub fn new(command: impl Into<String>) -> Self {
        OutputEnvelope {
            command: command.into(),
            config_echo: Vec::new(),
            rows: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn echo(&mut self, key: impl Into<String>, value: impl ToString) {
        self.config_echo.push((key.into(), value.to_string()));
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.render_json(),
            Format::Csv => self.render_csv(),
        }
    }

    fn render_json(&self) -> String {
        let mut root = Map::new();
        root.insert("schema_version".into(), json!(SCHEMA_VERSION));
        root.insert("command".into(), json!(self.command));
        let mut cfg = Map::new();
        for (k, v) in &self.config_echo {
            cfg.insert(k.clone(), json!(v));
        }
        root.insert("config_echo".into(), Value::Object(cfg));
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (k, v) in row {
                    m.insert((*k).into(), v.to_json());
                }
                Value::Object(m)
            })
            .collect();
        root.insert("rows".into(), Value::Array(rows));
        root.insert("warnings".into(), json!(self.warnings));
        let mut s = serde_json::to_string_pretty(&Value::Object(root)).unwrap();
        s.push('\n');
        s
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# schema_version: {SCHEMA_VERSION}\n"));
        out.push_str(&format!("# command: {}\n", self.command));
        for (k, v) in &self.config_echo {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        for w in &self.warnings {
            out.push_str(&format!("# warning: {w}\n"));
        }
        if let Some(first) = self.rows.first() {
            let header: Vec<&str> = first.iter().map(|(k, _)| *k).collect();
            out.push_str(&header.join(","));
            out.push('\n');
            for row in &self.rows {
                let cells: Vec<String> = row.iter().map(|(_, c)| c.to_csv()).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        out
    }
}
