//! Error-table assembly and serialization (CSV, JSON, markdown).
//!
//! Numbers print with 6 significant digits in scientific notation with a
//! two-digit exponent (the reference table layout); rates print with four
//! decimals. JSON carries full precision.

use serde::{Deserialize, Serialize};

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub degree: usize,
    pub h1_sigma: f64,
    pub h1_u: f64,
    pub l2_sigma: f64,
    pub l2_u: f64,
    pub rate_sigma: Option<f64>,
    pub rate_u: Option<f64>,
}

/// Per-degree errors and rates for one manufactured case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub case: String,
    /// Which error column feeds the rate formula ("l2").
    pub rate_basis: String,
    pub rows: Vec<ErrorRow>,
}

/// Formats like `1.884392e-04`: 6 significant digits, two-digit exponent.
pub fn fmt_sci(x: f64) -> String {
    if x == 0.0 {
        return "0.000000e+00".to_string();
    }
    let s = format!("{:.6e}", x);
    // pad the exponent that Rust prints as e-4 / e4 to e-04 / e+04
    let (mantissa, exp) = s.split_once('e').expect("scientific format");
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exp),
    };
    format!("{mantissa}e{sign}{digits:0>2}")
}

fn fmt_rate(r: Option<f64>, empty: &str) -> String {
    match r {
        Some(v) => format!("{v:.4}"),
        None => empty.to_string(),
    }
}

const COLUMNS: [&str; 7] = [
    "N",
    "sigma_h1",
    "u_h1",
    "sigma_l2",
    "u_l2",
    "rate_sigma",
    "rate_u",
];

impl ErrorReport {
    /// RFC-4180-style CSV: header row then one row per degree; empty rate
    /// cells in the first row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&COLUMNS.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.degree,
                fmt_sci(r.h1_sigma),
                fmt_sci(r.h1_u),
                fmt_sci(r.l2_sigma),
                fmt_sci(r.l2_u),
                fmt_rate(r.rate_sigma, ""),
                fmt_rate(r.rate_u, ""),
            ));
        }
        out
    }

    /// Markdown table in the seven-column reference layout.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str("| N | sigma H1 | u H1 | sigma L2 | u L2 | Rate_sigma | Rate_u |\n");
        out.push_str("|---|----------|------|----------|------|------------|--------|\n");
        for r in &self.rows {
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} | {} |\n",
                r.degree,
                fmt_sci(r.h1_sigma),
                fmt_sci(r.h1_u),
                fmt_sci(r.l2_sigma),
                fmt_sci(r.l2_u),
                fmt_rate(r.rate_sigma, "--"),
                fmt_rate(r.rate_u, "--"),
            ));
        }
        out
    }

    /// Full-precision JSON.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serialization")
    }
}
