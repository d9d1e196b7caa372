//! Text input and human-facing output.

use std::io::BufRead;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Formats `x` with nine significant digits, switching to exponent notation
/// outside `[1e-4, 1e9)`.
pub fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..9).contains(&mag) {
        return format!("{x:.8e}");
    }
    let decimals = (8 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // the rounding may have carried into a new digit, e.g. 9.999999999 -> 10.00000000
    let s = if s.trim_start_matches('-').split('.').next().map_or(0, str::len) > (mag.max(0) + 1) as usize {
        format!("{x:.prec$}", prec = decimals.saturating_sub(1))
    } else {
        s
    };
    s
}

/// Reads one number per line. Blank lines and `#` comments are skipped;
/// anything else that fails to parse is reported with its line number.
pub fn read_values<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let x: f64 = text.parse().map_err(|_| Error::Parse(format!("line {}: `{text}` is not a number", i + 1)))?;
        if !x.is_finite() {
            return Err(Error::Parse(format!("line {}: `{text}` is not finite", i + 1)));
        }
        out.push(x);
    }
    if out.is_empty() {
        return Err(Error::DataSize("no values found".into()));
    }
    Ok(out)
}

/// Ordered `key=value` report; numbers print with [`sig9`], JSON keeps full precision.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, Value)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(mut self, key: &str, x: f64) -> Self {
        let v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        self.entries.push((key.into(), v));
        self
    }

    pub fn int(mut self, key: &str, x: u64) -> Self {
        self.entries.push((key.into(), Value::from(x)));
        self
    }

    pub fn text(mut self, key: &str, s: impl Into<String>) -> Self {
        self.entries.push((key.into(), Value::String(s.into())));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    /// One `key=value` per line.
    pub fn to_lines(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let shown = match v {
                Value::Number(n) if n.is_f64() => sig9(n.as_f64().expect("f64")),
                Value::String(t) => t.clone(),
                Value::Null => "nan".into(),
                other => other.to_string(),
            };
            s.push_str(&format!("{k}={shown}\n"));
        }
        s
    }

    pub fn to_json(&self) -> String {
        let map: Map<String, Value> = self.entries.iter().cloned().collect();
        serde_json::to_string_pretty(&Value::Object(map)).expect("plain json")
    }
}
