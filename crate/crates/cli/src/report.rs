//! The JSON report printed on stdout by every command.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub seed: Option<u64>,
    pub violations: Vec<Value>,
    pub runtime_ms: u64,
}

/// Twelve significant digits; magnitudes below 1e-12 print as `0`.
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return "null".into();
    }
    if v.abs() < 1e-12 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        format!("{:.*}", (11 - exp) as usize, v)
    } else {
        format!("{v:.11e}")
    }
}

struct Sig12;

impl Formatter for Sig12 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(format_number(v).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig12);
        self.serialize(&mut ser).expect("report serializes");
        String::from_utf8(out).expect("utf-8")
    }
}
