//! Reports and their text / JSON renderings.
//!
//! JSON schema (one object per invocation):
//!
//! ```text
//! {
//!   "command":   subcommand name,
//!   "status":    "ok" | "negative" | "error",
//!   "exit_code": 0 | 1 | 2,
//!   "verdict":   short verdict string (absent on error),
//!   "seed":      integer, present for randomized commands,
//!   "report":    object of command-specific fields (absent on error),
//!   "body":      map text or CSV, when the command emits one,
//!   "error":     message (only on error)
//! }
//! ```
//!
//! Exact rationals are strings `p/q`; floats are JSON numbers.

use nilmap::{Number, Rational};
use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: &'static str,
    pub verdict: String,
    pub negative: bool,
    pub seed: Option<u64>,
    pub fields: Vec<(String, Value)>,
    pub body: Option<String>,
    /// Print only the body in text mode (CSV output).
    pub body_only: bool,
}

impl Report {
    pub fn new(command: &'static str, verdict: impl Into<String>) -> Self {
        Report {
            command,
            verdict: verdict.into(),
            negative: false,
            seed: None,
            fields: Vec::new(),
            body: None,
            body_only: false,
        }
    }

    pub fn negative(mut self, negative: bool) -> Self {
        self.negative = negative;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn field(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    pub fn body(mut self, body: String) -> Self {
        self.body = Some(body);
        self
    }

    pub fn exit_code(&self) -> u8 {
        u8::from(self.negative)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut obj = Map::new();
                obj.insert("command".into(), json!(self.command));
                obj.insert("status".into(), json!(if self.negative { "negative" } else { "ok" }));
                obj.insert("exit_code".into(), json!(self.exit_code()));
                obj.insert("verdict".into(), json!(self.verdict));
                if let Some(s) = self.seed {
                    obj.insert("seed".into(), json!(s));
                }
                let fields: Map<String, Value> = self.fields.iter().cloned().collect();
                obj.insert("report".into(), Value::Object(fields));
                if let Some(b) = &self.body {
                    obj.insert("body".into(), json!(b));
                }
                let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("json values serialize");
                s.push('\n');
                s
            }
            Format::Text | Format::Csv if self.body_only => self.body.clone().unwrap_or_default(),
            Format::Text | Format::Csv => {
                let mut s = format!("{}: {}\n", self.command, self.verdict);
                if let Some(seed) = self.seed {
                    s.push_str(&format!("seed: {seed}\n"));
                }
                for (k, v) in &self.fields {
                    s.push_str(&format!("{k}: {}\n", text_value(v)));
                }
                if let Some(b) = &self.body {
                    s.push_str(b);
                    if !b.ends_with('\n') {
                        s.push('\n');
                    }
                }
                s
            }
        }
    }
}

fn text_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        other => other.to_string(),
    }
}

pub fn error_text(command: &str, message: &str, code: u8, format: Format) -> String {
    match format {
        Format::Json => {
            let v = json!({ "command": command, "status": "error", "exit_code": code, "error": message });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json values serialize"))
        }
        _ => format!("error: {message}\n"),
    }
}

pub fn rational(r: &Rational) -> Value {
    json!(r.to_string())
}

pub fn rationals(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rational).collect())
}

pub fn number(x: &Number) -> Value {
    match x {
        Number::Exact(r) => rational(r),
        Number::Float(f) => float(*f),
    }
}

pub fn numbers(v: &[Number]) -> Value {
    Value::Array(v.iter().map(number).collect())
}

/// Non-finite floats become strings; JSON has no literal for them.
pub fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| json!(x.to_string()), Value::Number)
}

pub fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| float(x)).collect())
}

pub fn points(v: &[Vec<f64>]) -> Value {
    Value::Array(v.iter().map(|p| floats(p)).collect())
}
