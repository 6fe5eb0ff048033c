//! Deterministic text output helpers: CSV with a header row, '.' decimal
//! separator and '\n' line ends, suitable for diff-based tests.

use std::fs;
use std::path::Path;

use crate::{input_err, CliError};

pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        Self { buf: format!("{header}\n") }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn into_string(self) -> String {
        self.buf
    }

    pub fn write(self, path: impl AsRef<Path>) -> Result<(), CliError> {
        fs::write(path, self.buf).map_err(input_err)
    }
}

/// Canonical float formatting: enough digits to round-trip, no exponent
/// surprises for typical magnitudes.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{v:.12}")
    }
}

pub fn write_json(path: impl AsRef<Path>, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(input_err)?;
    fs::write(path, text + "\n").map_err(input_err)
}
