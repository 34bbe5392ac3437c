//! Sweep CSV writing and reading.
//!
//! Schema: `eta,s,n_eff,r,n,chi_out,chi_eve,i_p,feasible`, floats at 12
//! significant digits, rows in the sweep's deterministic `(eta, s, n_eff,
//! r)` key order, preceded by `#` header lines carrying the resolved
//! configuration. Identical configuration must produce byte-identical
//! output, so nothing time- or environment-dependent goes in here.

use anyhow::{bail, Context, Result};
use bpriv_core::privacy::SweepRow;

pub const COLUMNS: &str = "eta,s,n_eff,r,n,chi_out,chi_eve,i_p,feasible";

/// 12-significant-digit float formatting shared by every numeric column.
pub fn fmt(value: f64) -> String {
    if value.is_nan() {
        "nan".to_string()
    } else {
        format!("{value:.11e}")
    }
}

pub fn write_rows(header: &str, rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 96 + header.len());
    out.push_str(header);
    out.push_str(COLUMNS);
    out.push('\n');
    for row in rows {
        let (chi_out, chi_eve, i_p) = match &row.values {
            Some(v) => (v.chi_out, v.chi_eve, v.i_p),
            None => (f64::NAN, f64::NAN, f64::NAN),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt(row.eta),
            fmt(row.s),
            fmt(row.n_eff),
            fmt(row.r),
            fmt(row.n),
            fmt(chi_out),
            fmt(chi_eve),
            fmt(i_p),
            row.feasible(),
        ));
    }
    out
}

/// One parsed sweep record.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub eta: f64,
    pub s: f64,
    pub n_eff: f64,
    pub r: f64,
    pub n: f64,
    pub chi_out: f64,
    pub chi_eve: f64,
    pub i_p: f64,
    pub feasible: bool,
}

/// Parses sweep CSV text, reporting the 1-based line number on any defect.
pub fn parse(text: &str) -> Result<Vec<CsvRow>> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != COLUMNS {
                bail!("line {lineno}: expected header '{COLUMNS}', got '{line}'");
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            bail!("line {lineno}: expected 9 fields, got {}", fields.len());
        }
        let num = |i: usize| -> Result<f64> {
            fields[i]
                .parse::<f64>()
                .with_context(|| format!("line {lineno}: field '{}' is not a number", fields[i]))
        };
        let feasible = match fields[8] {
            "true" => true,
            "false" => false,
            other => bail!("line {lineno}: feasible flag must be true/false, got '{other}'"),
        };
        rows.push(CsvRow {
            eta: num(0)?,
            s: num(1)?,
            n_eff: num(2)?,
            r: num(3)?,
            n: num(4)?,
            chi_out: num(5)?,
            chi_eve: num(6)?,
            i_p: num(7)?,
            feasible,
        });
    }
    if !saw_header {
        bail!("no header row found; expected '{COLUMNS}'");
    }
    Ok(rows)
}
