//! Trajectory CSV and JSON report serialization.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sim::Trajectory;

/// One row of a report: a named quantity, optionally compared to a reference value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproReport {
    pub quantity: String,
    pub paper_value: Option<f64>,
    pub computed_value: f64,
    pub abs_error: Option<f64>,
    pub note: String,
}

impl ReproReport {
    pub fn compared(
        quantity: &str,
        reference: f64,
        computed: f64,
        note: impl Into<String>,
    ) -> Self {
        Self {
            quantity: quantity.to_string(),
            paper_value: Some(reference),
            computed_value: computed,
            abs_error: Some((reference - computed).abs()),
            note: note.into(),
        }
    }

    pub fn observed(quantity: &str, computed: f64, note: impl Into<String>) -> Self {
        Self {
            quantity: quantity.to_string(),
            paper_value: None,
            computed_value: computed,
            abs_error: None,
            note: note.into(),
        }
    }
}

/// Formats like C's `%.9g`: nine significant digits, trailing zeros trimmed,
/// scientific notation outside `1e-5 ≤ |v| < 1e9`.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    if !(-5..9).contains(&exp) {
        return format!("{}e{}", trim_zeros(mantissa), exp);
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes `t,x1,...,xn,V1,V2,spread,sum` rows; returns the number of bytes written.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut out: W) -> Result<usize> {
    let n = traj.samples.first().map_or(0, |s| s.x.len());
    let mut text = String::from("t");
    for i in 1..=n {
        text.push_str(&format!(",x{i}"));
    }
    text.push_str(",V1,V2,spread,sum\n");
    for s in &traj.samples {
        let mut fields = Vec::with_capacity(n + 5);
        fields.push(format_sig9(s.t));
        fields.extend(s.x.iter().map(|&v| format_sig9(v)));
        for v in [s.v1, s.v2, s.spread, s.sum] {
            fields.push(format_sig9(v));
        }
        text.push_str(&fields.join(","));
        text.push('\n');
    }
    out.write_all(text.as_bytes())?;
    Ok(text.len())
}

pub fn write_report_json<W: Write>(rows: &[ReproReport], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    out.write_all(b"\n")?;
    Ok(())
}
