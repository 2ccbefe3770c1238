//! File formats and numeric rendering.
//!
//! * Basis files: JSON object `{"matrix": [9 floats, row-major], "p": float}`,
//!   a JSON array of search records carrying the same fields, or plain text
//!   with 9 whitespace-separated floats (row-major). All three are accepted
//!   everywhere a basis is read.
//! * Schedule files: CSV `p0,x0,y0,z0,eps,peps` (header line optional,
//!   `#` comments allowed).
//! * Certificates: JSON lines, one row object per line, terminated by a
//!   summary object.
//!
//! All floating-point output carries 12 significant digits.

use anyhow::{anyhow, bail, Context, Result};
use serde_json::Value;
use std::io::Write;
use superball_core::certifier::{CertificateRow, ScheduleRow};

/// Renders with 12 significant digits: plain decimal notation for moderate
/// magnitudes, exponent notation otherwise. Deterministic.
pub fn fmt_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    debug_assert!(x.is_finite());
    let e = x.abs().log10().floor() as i32;
    if (-5..12).contains(&e) {
        let decimals = (11 - e).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.11e}")
    }
}

struct Sig12Formatter;

impl serde_json::ser::Formatter for Sig12Formatter {
    fn write_f64<W: Write + ?Sized>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(fmt_sig12(value).as_bytes())
    }
}

/// Compact JSON with 12-significant-digit floats.
pub fn to_json(value: &Value) -> String {
    use serde::Serialize;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig12Formatter);
    value
        .serialize(&mut ser)
        .expect("serializing an in-memory value cannot fail");
    String::from_utf8(out).expect("JSON output is UTF-8")
}

/// A matrix read from a file, with the exponent when the file carries one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisEntry {
    pub matrix: [[f64; 3]; 3],
    pub p: Option<f64>,
}

fn matrix_from_flat(values: &[f64]) -> Result<[[f64; 3]; 3]> {
    if values.len() != 9 {
        bail!("matrix needs 9 entries (row-major), got {}", values.len());
    }
    Ok([
        [values[0], values[1], values[2]],
        [values[3], values[4], values[5]],
        [values[6], values[7], values[8]],
    ])
}

fn entry_from_object(obj: &serde_json::Map<String, Value>) -> Result<BasisEntry> {
    let matrix = obj
        .get("matrix")
        .ok_or_else(|| anyhow!("missing \"matrix\" field"))?
        .as_array()
        .ok_or_else(|| anyhow!("\"matrix\" must be an array of 9 numbers"))?
        .iter()
        .map(|v| {
            v.as_f64()
                .ok_or_else(|| anyhow!("non-numeric matrix entry {v}"))
        })
        .collect::<Result<Vec<f64>>>()?;
    let p = match obj.get("p") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_f64()
                .ok_or_else(|| anyhow!("field \"p\" must be a number, got {v}"))?,
        ),
    };
    Ok(BasisEntry {
        matrix: matrix_from_flat(&matrix)?,
        p,
    })
}

/// Parses any accepted basis file format. The plain-text reader names the
/// offending token on failure.
pub fn parse_basis_entries(text: &str) -> Result<Vec<BasisEntry>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        let value: Value = serde_json::from_str(text).context("invalid JSON")?;
        match value {
            Value::Object(obj) => Ok(vec![entry_from_object(&obj)?]),
            Value::Array(items) => {
                if items.is_empty() {
                    bail!("JSON array holds no records");
                }
                items
                    .iter()
                    .enumerate()
                    .map(|(i, item)| {
                        item.as_object()
                            .ok_or_else(|| anyhow!("record {i} is not an object"))
                            .and_then(|obj| {
                                entry_from_object(obj).with_context(|| format!("record {i}"))
                            })
                    })
                    .collect()
            }
            other => bail!("expected a JSON object or array, got {other}"),
        }
    } else {
        let mut values = Vec::new();
        for token in text.split_whitespace() {
            let v: f64 = token
                .parse()
                .map_err(|_| anyhow!("invalid number `{token}` in matrix file"))?;
            values.push(v);
        }
        Ok(vec![BasisEntry {
            matrix: matrix_from_flat(&values)?,
            p: None,
        }])
    }
}

/// Parses a schedule CSV. Lines: `p0,x0,y0,z0,eps,peps`; empty lines and
/// `#` comments are skipped; a leading header line is recognized by its
/// first field.
pub fn parse_schedule(text: &str) -> Result<Vec<ScheduleRow>> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if idx == 0 && fields.first() == Some(&"p0") {
            continue;
        }
        if fields.len() != 6 {
            bail!(
                "schedule line {}: expected 6 fields `p0,x0,y0,z0,eps,peps`, got {}",
                idx + 1,
                fields.len()
            );
        }
        let mut nums = [0.0f64; 6];
        for (slot, token) in nums.iter_mut().zip(&fields) {
            *slot = token
                .parse()
                .map_err(|_| anyhow!("schedule line {}: invalid number `{token}`", idx + 1))?;
        }
        let row = ScheduleRow {
            p0: nums[0],
            x0: nums[1],
            y0: nums[2],
            z0: nums[3],
            eps: nums[4],
            peps: nums[5],
        };
        if !(row.eps > 0.0 && row.peps > 0.0) {
            bail!("schedule line {}: eps and peps must be positive", idx + 1);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("schedule file holds no rows");
    }
    Ok(rows)
}

pub fn schedule_to_csv(rows: &[ScheduleRow]) -> String {
    let mut out = String::from("p0,x0,y0,z0,eps,peps\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_sig12(r.p0),
            fmt_sig12(r.x0),
            fmt_sig12(r.y0),
            fmt_sig12(r.z0),
            fmt_sig12(r.eps),
            fmt_sig12(r.peps),
        ));
    }
    out
}

fn flat_matrix(m: &[[f64; 3]; 3]) -> Vec<Value> {
    m.iter()
        .flat_map(|row| row.iter().map(|v| Value::from(*v)))
        .collect()
}

/// One certificate row as a JSON line value.
pub fn certificate_row_value(row: &CertificateRow) -> Value {
    serde_json::json!({
        "p_lo": row.p_lo,
        "p_hi": row.p_hi,
        "center": [row.center[0], row.center[1], row.center[2]],
        "eps": row.eps,
        "T": flat_matrix(&row.t),
        "lhs": [row.lhs.lo(), row.lhs.hi()],
        "rhs": [row.rhs.lo(), row.rhs.hi()],
        "region_ok": row.region_ok,
        "pass": row.pass,
    })
}

/// Certificate file: one JSON line per row, then a summary object.
pub fn certificate_jsonl(rows: &[CertificateRow], covered: (f64, f64), all_pass: bool) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(&to_json(&certificate_row_value(row)));
        out.push('\n');
    }
    let summary = serde_json::json!({
        "covered": [covered.0, covered.1],
        "rows": rows.len(),
        "all_pass": all_pass,
    });
    out.push_str(&to_json(&summary));
    out.push('\n');
    out
}
