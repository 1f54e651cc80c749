//! Scenario reports: the versioned JSON document every scenario emits, its
//! exact-float writer and the aligned text rendering.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Value};

use crate::linalg::{Complex, ComplexMatrix};
use crate::state::DensityOperator;

/// Bumped on any incompatible change to the report layout; the matching
/// JSON Schema lives in `docs/report-schema.json`.
pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
}

impl Check {
    /// Passes when `measured <= tolerance`.
    pub fn at_most(name: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured <= tolerance,
            measured,
            tolerance,
        }
    }

    /// Passes when `measured >= -tolerance`.
    pub fn at_least_neg(name: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured >= -tolerance,
            measured,
            tolerance,
        }
    }

    /// Passes when `|measured - expected| <= tolerance`; records the deviation.
    pub fn close(name: &str, measured: f64, expected: f64, tolerance: f64) -> Self {
        Self::at_most(name, (measured - expected).abs(), tolerance)
    }

    pub fn flag(name: &str, passed: bool) -> Self {
        Self {
            name: name.into(),
            passed,
            measured: if passed { 1.0 } else { 0.0 },
            tolerance: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub schema_version: &'static str,
    pub scenario: String,
    pub seed: u64,
    pub inputs: Value,
    pub results: Value,
    pub checks: Vec<Check>,
}

impl ScenarioReport {
    pub fn new(
        scenario: &str,
        seed: u64,
        inputs: Value,
        results: Value,
        checks: Vec<Check>,
    ) -> Self {
        debug_assert!(!checks.is_empty());
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.into(),
            seed,
            inputs,
            results,
            checks,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// One line of compact JSON with every float at 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, ExactFloats);
        self.serialize(&mut ser)
            .expect("report serialization cannot fail");
        out.push(b'\n');
        String::from_utf8(out).expect("serde_json writes UTF-8")
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "scenario {}  seed {}  schema {}\n\n",
            self.scenario, self.seed, self.schema_version
        );
        let rows: Vec<[String; 4]> = self
            .checks
            .iter()
            .map(|c| {
                [
                    c.name.clone(),
                    if c.passed { "pass" } else { "FAIL" }.into(),
                    format!("{:.6e}", c.measured),
                    format!("{:.1e}", c.tolerance),
                ]
            })
            .collect();
        s.push_str(&table(&["check", "status", "measured", "tolerance"], &rows));
        for (title, value) in [("inputs", &self.inputs), ("results", &self.results)] {
            let mut flat = Vec::new();
            flatten("", value, &mut flat);
            if flat.is_empty() {
                continue;
            }
            s.push('\n');
            let rows: Vec<[String; 2]> = flat.into_iter().map(|(k, v)| [k, v]).collect();
            s.push_str(&table(&[title, "value"], &rows));
        }
        s
    }
}

/// Compact layout (the trait defaults), floats as `{:.16e}` (17 significant digits, exact round trip).
struct ExactFloats;

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value == 0.0 {
            // keeps -0.0 and 0.0 byte-identical
            return writer.write_all(b"0.0000000000000000e0");
        }
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

fn table<const N: usize>(header: &[&str; N], rows: &[[String; N]]) -> String {
    let mut widths = header.map(str::len);
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[&str]| {
        let mut l = cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ");
        l.truncate(l.trim_end().len());
        l.push('\n');
        l
    };
    let rule = widths.map(|w| "-".repeat(w));
    let mut s = line(header);
    s.push_str(&line(&rule.each_ref().map(String::as_str)));
    for row in rows {
        s.push_str(&line(&row.each_ref().map(String::as_str)));
    }
    s
}

const MAX_TEXT_ARRAY: usize = 16;

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) if is_complex(map) => out.push((prefix.into(), complex_text(map))),
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) if items.len() > MAX_TEXT_ARRAY => {
            out.push((prefix.into(), format!("[{} items]", items.len())));
        }
        Value::Array(items) if items.iter().all(|v| v.is_number() || v.is_string()) => {
            let cells: Vec<String> = items.iter().map(scalar_text).collect();
            out.push((prefix.into(), format!("[{}]", cells.join(", "))));
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        other => out.push((prefix.into(), scalar_text(other))),
    }
}

fn is_complex(map: &serde_json::Map<String, Value>) -> bool {
    map.len() == 2
        && map.get("re").is_some_and(Value::is_number)
        && map.get("im").is_some_and(Value::is_number)
}

fn complex_text(map: &serde_json::Map<String, Value>) -> String {
    let re = map["re"].as_f64().unwrap_or(f64::NAN);
    let im = map["im"].as_f64().unwrap_or(f64::NAN);
    format!("{re:.6}{im:+.6}i")
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            if x == 0.0 || (1e-3..1e6).contains(&x.abs()) {
                format!("{x:.10}")
            } else {
                format!("{x:.10e}")
            }
        }
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn complex_json(z: Complex) -> Value {
    json!({ "re": z.re, "im": z.im })
}

/// Row-major array of rows of `{"re", "im"}` objects.
pub fn matrix_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array(m.row(i).iter().map(|&z| complex_json(z)).collect()))
            .collect(),
    )
}

pub fn vector_json(v: &[Complex]) -> Value {
    Value::Array(v.iter().map(|&z| complex_json(z)).collect())
}

pub fn density_json(rho: &DensityOperator) -> Value {
    json!({ "dims": rho.dims(), "matrix": matrix_json(rho.matrix()) })
}
