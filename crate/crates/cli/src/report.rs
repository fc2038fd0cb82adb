//! Report envelope, number rounding and CSV flattening.

use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// Where each top-level quantity comes from.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Closed-form expression evaluated in floating point.
    Formula,
    /// Exact or bounded count from explicit enumeration.
    Enumeration,
    /// Brute-force geometric check on materialized points.
    Oracle,
}

pub struct Report {
    pub command: String,
    pub provenance: Vec<(&'static str, Source)>,
    pub body: Value,
    /// `Some(false)` when the command asserts something that failed.
    pub passed: Option<bool>,
}

impl Report {
    pub fn new(command: &str, body: impl Serialize) -> Self {
        Report {
            command: command.into(),
            provenance: Vec::new(),
            body: serde_json::to_value(body).expect("reports serialize"),
            passed: None,
        }
    }

    pub fn from(mut self, field: &'static str, src: Source) -> Self {
        self.provenance.push((field, src));
        self
    }

    pub fn check(mut self, passed: bool) -> Self {
        self.passed = Some(passed);
        self
    }

    pub fn to_value(&self) -> Value {
        let mut out = Map::new();
        out.insert("schema_version".into(), SCHEMA_VERSION.into());
        out.insert("command".into(), self.command.clone().into());
        if let Some(p) = self.passed {
            out.insert("passed".into(), p.into());
        }
        let prov: Map<String, Value> = self
            .provenance
            .iter()
            .map(|(k, s)| (k.to_string(), serde_json::to_value(s).unwrap()))
            .collect();
        out.insert("provenance".into(), prov.into());
        out.insert("report".into(), round_numbers(self.body.clone()));
        Value::Object(out)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("values serialize");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut rows = Vec::new();
        flatten("", &self.to_value(), &mut rows);
        let mut out = String::from("key,value\n");
        for (k, v) in rows {
            out.push_str(&csv_field(&k));
            out.push(',');
            out.push_str(&csv_field(&v));
            out.push('\n');
        }
        out
    }
}

/// Rounds every float to 12 significant digits so reports compare byte-wise.
pub fn round_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap();
            let r: f64 = format!("{x:.11e}").parse().unwrap();
            serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_numbers).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_numbers(v))).collect()),
        other => other,
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(o) => o.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::String(s) => out.push((prefix.into(), s.clone())),
        other => out.push((prefix.into(), other.to_string())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.into()
    }
}
