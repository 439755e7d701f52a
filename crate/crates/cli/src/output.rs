//! Machine-readable output: the JSON record shared by all subcommands and
//! the CSV tables of `scan` and `landscape`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use point_stability_core::ScanRow;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "1";

/// Envelope of every JSON document the CLI emits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub schema_version: String,
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub results: Value,
    pub tolerances: BTreeMap<String, f64>,
    /// Wall-clock seconds; `null` for `verify`, whose reports must be
    /// byte-for-byte reproducible.
    pub timing: Option<f64>,
}

impl OutputRecord {
    pub fn new(command: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            parameters: BTreeMap::new(),
            results: Value::Null,
            tolerances: BTreeMap::new(),
            timing: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters.insert(key.to_string(), to_value(value));
        self
    }

    pub fn tolerance(mut self, key: &str, value: f64) -> Self {
        self.tolerances.insert(key.to_string(), value);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records serialize");
        s.push('\n');
        s
    }
}

pub fn to_value(value: impl Serialize) -> Value {
    serde_json::to_value(value).expect("plain data serializes")
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:e}"),
        _ => String::new(),
    }
}

/// `1/(2√2 m)`, the large-mass asymptote of `Λ(m)`.
pub fn asymptote(m: f64) -> f64 {
    1.0 / (2.0 * std::f64::consts::SQRT_2 * m)
}

/// Scan rows as CSV; columns for `β` values that were not requested (or
/// failed) are left empty.
pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from("m,lambda,lambda1,lambda2,bound,asym\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            cell(Some(r.m)),
            cell(r.lambda0_half),
            cell(r.lambda1),
            cell(r.lambda2),
            cell(Some(r.bound)),
            cell(Some(asymptote(r.m)))
        )
        .unwrap();
    }
    out
}

pub fn landscape_csv(grid_q: &[f64], grid_b: &[f64], values: &[Vec<f64>]) -> String {
    let mut out = String::from("Q,b,value\n");
    for (q, row) in grid_q.iter().zip(values) {
        for (b, v) in grid_b.iter().zip(row) {
            writeln!(out, "{},{},{}", cell(Some(*q)), cell(Some(*b)), cell(Some(*v))).unwrap();
        }
    }
    out
}

/// `n` points from `lo` to `hi` inclusive, uniformly in `ln m`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// `n` points from `lo` to `hi` inclusive, uniformly spaced.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}
