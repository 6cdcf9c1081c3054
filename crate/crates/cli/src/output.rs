//! Output files: a header block, optional metadata, then a table.
//!
//! CSV files carry the header and metadata as `# ` comment lines. JSONL files
//! carry them as the first two records. Numbers use the shortest round-trip
//! form in both formats, so reruns with identical inputs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};
use crate::settings::Settings;

pub const TOOL: &str = "rank-garch";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "jsonl" => Ok(Self::Jsonl),
            other => Err(format!("unknown format '{other}' (expected csv or jsonl)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Str(String),
    Num(f64),
    Int(u64),
    Bool(bool),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Str(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Str(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// Shortest round-trip text, with exponents for very small or large values.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        serde_json::Number::from_f64(v).map(|n| n.to_string()).unwrap_or_default()
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            other => other.csv(),
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Str(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Str(s) => s.clone(),
            Cell::Num(v) => fmt_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Str(s) => Value::String(s.clone()),
            Cell::Num(v) => match serde_json::Number::from_f64(*v) {
                Some(n) => Value::Number(n),
                None => Value::String(fmt_f64(*v)),
            },
            Cell::Int(v) => json!(v),
            Cell::Bool(b) => json!(b),
        }
    }
}

/// Identifies the run that produced a file.
#[derive(Debug, Clone)]
pub struct Header {
    pub command: String,
    pub input_sha256: Option<String>,
    pub seed: u64,
    pub config: Vec<(String, String)>,
}

impl Header {
    pub fn new(command: &str, settings: &Settings, input_sha256: Option<String>) -> CliResult<Self> {
        Ok(Self {
            command: command.to_string(),
            input_sha256,
            seed: settings.seed()?,
            config: settings.echo().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        })
    }

    fn csv(&self, out: &mut String) {
        let _ = writeln!(out, "# {TOOL} {VERSION}");
        let _ = writeln!(out, "# command = {}", self.command);
        let _ = writeln!(out, "# input_sha256 = {}", self.input_sha256.as_deref().unwrap_or("none"));
        let _ = writeln!(out, "# seed = {}", self.seed);
        for (k, v) in &self.config {
            let _ = writeln!(out, "# config.{k} = {v}");
        }
    }

    fn json(&self) -> Value {
        let config: Map<String, Value> = self
            .config
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        json!({
            "type": "header",
            "tool": TOOL,
            "version": VERSION,
            "command": self.command,
            "input_sha256": self.input_sha256,
            "seed": self.seed,
            "config": config,
        })
    }
}

/// A table plus run metadata, ready to be written.
#[derive(Debug, Clone)]
pub struct Table {
    pub meta: Vec<(String, Cell)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Cell>) -> &mut Self {
        self.meta.push((key.to_string(), value.into()));
        self
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render(&self, header: &Header, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Csv => {
                header.csv(&mut out);
                for (k, v) in &self.meta {
                    let _ = writeln!(out, "# meta.{k} = {}", v.text());
                }
                let _ = writeln!(out, "{}", self.columns.join(","));
                for r in &self.rows {
                    let line: Vec<String> = r.iter().map(Cell::csv).collect();
                    let _ = writeln!(out, "{}", line.join(","));
                }
            }
            Format::Jsonl => {
                let _ = writeln!(out, "{}", header.json());
                let mut meta = Map::new();
                meta.insert("type".into(), json!("meta"));
                for (k, v) in &self.meta {
                    meta.insert(k.clone(), v.json());
                }
                let _ = writeln!(out, "{}", Value::Object(meta));
                for r in &self.rows {
                    let mut rec = Map::new();
                    rec.insert("type".into(), json!("record"));
                    for (c, v) in self.columns.iter().zip(r) {
                        rec.insert(c.clone(), v.json());
                    }
                    let _ = writeln!(out, "{}", Value::Object(rec));
                }
            }
        }
        out
    }
}

/// Writes `text` to `path`, or to stdout when `path` is `None` or `-`.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) if p != Path::new("-") => {
            fs::write(p, text).map_err(|e| CliError::input(format!("{}: {e}", p.display())))
        }
        _ => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::input(format!("stdout: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> Header {
        Header {
            command: "fit".into(),
            input_sha256: Some("ab".into()),
            seed: 7,
            config: vec![("model".into(), "garch".into()), ("n".into(), "10".into())],
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["param", "value"]);
        t.meta("converged", true).meta("model", "garch(1,1)");
        t.row(vec!["omega".into(), 6.5e-6.into()]);
        t.row(vec!["a,b".into(), 0.25.into()]);
        let expect = format!(
            "# rank-garch {VERSION}\n# command = fit\n# input_sha256 = ab\n# seed = 7\n\
             # config.model = garch\n# config.n = 10\n# meta.converged = true\n# meta.model = garch(1,1)\n\
             param,value\nomega,6.5e-6\n\"a,b\",0.25\n"
        );
        assert_eq!(t.render(&header(), Format::Csv), expect);
    }

    #[test]
    fn jsonl_layout() {
        let mut t = Table::new(&["param", "value"]);
        t.meta("n", 3usize);
        t.row(vec!["omega".into(), f64::NAN.into()]);
        let text = t.render(&header(), Format::Jsonl);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        let h: Value = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(h["config"]["n"], "10");
        assert_eq!(h["seed"], 7);
        assert_eq!(lines[1], r#"{"type":"meta","n":3}"#);
        assert_eq!(lines[2], r#"{"type":"record","param":"omega","value":"NaN"}"#);
    }

    #[test]
    fn float_text() {
        assert_eq!(fmt_f64(0.716), "0.716");
        assert_eq!(fmt_f64(1e-300), "1e-300");
        assert_eq!(fmt_f64(-0.0), "-0.0");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }
}
