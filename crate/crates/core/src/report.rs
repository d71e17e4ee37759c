//! Verification reports and their canonical JSON form.
//!
//! Canonical output sorts object keys, writes every non-integral number with
//! 17 significant digits and spells non-finite values as strings, so equal
//! reports are equal byte strings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

/// Whether the constants behind a number are rigorous or a demo surrogate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Strict,
    Surrogate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportEntry {
    pub name: String,
    pub status: Status,
    pub measured: f64,
    pub bound: Option<f64>,
    pub provenance: Provenance,
    pub witness: Option<Value>,
    pub details: Map<String, Value>,
}

impl ReportEntry {
    /// Passes iff `measured <= bound`.
    pub fn check_le(name: &str, measured: f64, bound: f64, provenance: Provenance) -> Self {
        let status = if measured <= bound { Status::Pass } else { Status::Fail };
        ReportEntry {
            name: name.into(),
            status,
            measured,
            bound: Some(bound),
            provenance,
            witness: None,
            details: Map::new(),
        }
    }

    /// Passes iff `measured >= bound`.
    pub fn check_ge(name: &str, measured: f64, bound: f64, provenance: Provenance) -> Self {
        let mut e = ReportEntry::check_le(name, -measured, -bound, provenance);
        e.measured = measured;
        e.bound = Some(bound);
        e.with_detail("direction", json!("ge"))
    }

    pub fn check(name: &str, ok: bool, measured: f64, provenance: Provenance) -> Self {
        ReportEntry {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            measured,
            bound: None,
            provenance,
            witness: None,
            details: Map::new(),
        }
    }

    pub fn info(name: &str, measured: f64, provenance: Provenance) -> Self {
        ReportEntry {
            name: name.into(),
            status: Status::Info,
            measured,
            bound: None,
            provenance,
            witness: None,
            details: Map::new(),
        }
    }

    /// Signed slack: `bound − measured` for upper bounds, `measured − bound` for lower ones.
    pub fn margin(&self) -> Option<f64> {
        self.bound.map(|b| {
            let lower_check = self.details.get("direction").and_then(Value::as_str) == Some("ge");
            if lower_check {
                self.measured - b
            } else {
                b - self.measured
            }
        })
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    pub fn with_witness(mut self, witness: Value) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn with_detail(mut self, key: &str, value: Value) -> Self {
        self.details.insert(key.into(), value);
        self
    }

    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("name".into(), Value::String(self.name.clone()));
        m.insert("status".into(), serde_json::to_value(self.status).expect("status"));
        m.insert("measured".into(), num(self.measured));
        m.insert("bound".into(), self.bound.map_or(Value::Null, num));
        m.insert("margin".into(), self.margin().map_or(Value::Null, num));
        m.insert("provenance".into(), serde_json::to_value(self.provenance).expect("provenance"));
        m.insert("witness".into(), self.witness.clone().unwrap_or(Value::Null));
        m.insert("details".into(), Value::Object(self.details.clone()));
        Value::Object(m)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub entries: Vec<ReportEntry>,
    pub tables: Map<String, Value>,
    pub error: Option<String>,
}

impl Report {
    pub fn new(command: &str, config: Value) -> Self {
        Report {
            command: command.into(),
            config,
            entries: Vec::new(),
            tables: Map::new(),
            error: None,
        }
    }

    /// Adds an entry; failed entries without a witness get one from their numbers.
    pub fn push(&mut self, mut entry: ReportEntry) {
        if entry.status == Status::Fail && entry.witness.is_none() {
            entry.witness = Some(json!({
                "measured": num(entry.measured),
                "bound": entry.bound.map_or(Value::Null, num),
            }));
        }
        self.entries.push(entry);
    }

    pub fn extend(&mut self, entries: impl IntoIterator<Item = ReportEntry>) {
        for e in entries {
            self.push(e);
        }
    }

    pub fn all_passed(&self) -> bool {
        self.error.is_none() && self.entries.iter().all(ReportEntry::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportEntry> {
        self.entries.iter().filter(|e| !e.passed())
    }

    pub fn entry(&self, name: &str) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn to_value(&self) -> Value {
        json!({
            "command": self.command,
            "config": self.config,
            "entries": self.entries.iter().map(ReportEntry::to_value).collect::<Vec<_>>(),
            "tables": self.tables,
            "error": self.error,
            "passed": self.all_passed(),
            "version": env!("CARGO_PKG_VERSION"),
        })
    }

    pub fn to_canonical_json(&self) -> String {
        canonical_json(&self.to_value())
    }
}

/// JSON number for finite values, a string for `inf`, `-inf` and `nan`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
    } else if x.is_nan() {
        Value::String("nan".into())
    } else if x > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, value: &Value, depth: usize) {
    match value {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&value.to_string()),
        Value::Number(n) => {
            if n.is_i64() || n.is_u64() {
                out.push_str(&n.to_string());
            } else {
                let x = n.as_f64().expect("finite");
                write!(out, "{x:.16e}").expect("string write");
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(out, depth + 1);
                write_value(out, item, depth + 1);
            }
            newline(out, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(out, depth + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[k], depth + 1);
            }
            newline(out, depth);
            out.push('}');
        }
    }
}

fn newline(out: &mut String, depth: usize) {
    out.push('\n');
    for _ in 0..depth {
        out.push_str("  ");
    }
}
