//! Report envelopes and writers.
//!
//! Every report is wrapped with the schema version, the scenario that
//! produced it and a SHA-256 hash of that scenario's canonical JSON. Object
//! keys serialize sorted, so equal scenarios give equal bytes.

use crate::error::{Error, Result};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = concat!("approxgroups ", env!("CARGO_PKG_VERSION"));

/// Hex SHA-256 of the compact canonical encoding.
pub fn scenario_hash(scenario: &Value) -> String {
    let bytes = serde_json::to_vec(scenario).expect("JSON values always serialize");
    hex::encode(Sha256::digest(&bytes))
}

pub fn envelope(scenario: Value, pass: bool, result: Value) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "tool": TOOL,
        "scenario_hash": scenario_hash(&scenario),
        "scenario": scenario,
        "pass": pass,
        "result": result,
    })
}

fn io(e: std::io::Error) -> Error {
    Error::Budget(format!("output: {e}"))
}

/// Pretty JSON with a trailing newline, to `out` or stdout.
pub fn write_json(doc: &Value, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc).expect("JSON values always serialize");
    text.push('\n');
    match out {
        Some(p) => std::fs::write(p, text).map_err(io),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(io),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A small table destined for CSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for line in std::iter::once(&self.header).chain(&self.rows) {
            s.push_str(&line.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, out: Option<&Path>) -> Result<()> {
        match out {
            Some(p) => std::fs::write(p, self.to_csv()).map_err(io),
            None => std::io::stdout().lock().write_all(self.to_csv().as_bytes()).map_err(io),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_order_independent() {
        let a: Value = serde_json::from_str(r#"{"b": 1, "a": [1, 2]}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"a": [1, 2], "b": 1}"#).unwrap();
        assert_eq!(scenario_hash(&a), scenario_hash(&b));
        // sha256 of "{}"
        assert_eq!(scenario_hash(&json!({})), "44136fa355b3678a1146ad16f7e8649e94fb4fc21fe77e8310c060f61caaff8a");
    }

    #[test]
    fn csv_quoting() {
        let mut t = Table::new(&["r", "size"]);
        t.push(vec!["0".into(), "1".into()]);
        t.push(vec!["a,b".into(), "say \"x\"".into()]);
        assert_eq!(t.to_csv(), "r,size\n0,1\n\"a,b\",\"say \"\"x\"\"\"\n");
    }
}
