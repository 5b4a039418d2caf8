//! Output assembly: `key=value` records or human-readable text.

use std::fmt::Write;

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Records,
}

pub enum Value {
    Num(f64),
    Int(usize),
    Text(String),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

/// 17 significant digits, so records round-trip exactly.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn render(v: &Value) -> String {
    match v {
        Value::Num(x) => num(*x),
        Value::Int(n) => n.to_string(),
        Value::Text(s) => s.clone(),
    }
}

pub struct Report {
    format: Format,
    text: String,
}

impl Report {
    pub fn new(format: Format) -> Self {
        Self {
            format,
            text: String::new(),
        }
    }

    pub fn format(&self) -> Format {
        self.format
    }

    /// One record line; ignored in human mode.
    pub fn record(&mut self, kind: &str, fields: Vec<(&str, Value)>) {
        if self.format != Format::Records {
            return;
        }
        let _ = write!(self.text, "record={kind}");
        for (k, v) in &fields {
            let _ = write!(self.text, " {k}={}", render(v));
        }
        self.text.push('\n');
    }

    /// One line of prose; ignored in record mode.
    pub fn human(&mut self, line: impl AsRef<str>) {
        if self.format == Format::Human {
            self.text.push_str(line.as_ref());
            self.text.push('\n');
        }
    }

    /// Verbatim text in both modes; in record mode every line is prefixed
    /// with `# ` so record parsers can skip it.
    pub fn block(&mut self, text: &str) {
        for line in text.lines() {
            if self.format == Format::Records {
                self.text.push_str("# ");
            }
            self.text.push_str(line);
            self.text.push('\n');
        }
    }

    pub fn into_string(self) -> String {
        self.text
    }
}
