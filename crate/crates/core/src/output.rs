//! CSV and JSON emission of sweep rows.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::experiments::SweepRow;

pub const CSV_HEADER: &str = "scenario,p0,c01,c10,sigma_p,sigma_c01,sigma_c10,delta,l_star,var_delta_hat,p_err_analytic,delta_inc_analytic,norm_inc_analytic,p_err_mc,delta_inc_mc,norm_inc_mc,trials,seed,clamped,truncations";

const SIGNIFICANT_DIGITS: usize = 9;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("no rows to write")]
    EmptyRows,
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), OutputError> {
    fs::write(path, contents).map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Format a real with 9 significant digits, `%g` style: fixed notation for
/// decimal exponents in `[-5, 9)`, scientific otherwise, trailing zeros
/// removed. Negative zero prints as `0`.
pub fn format_real(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{v:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt_real(v: Option<f64>) -> String {
    v.map(format_real).unwrap_or_default()
}

/// Render rows with [`CSV_HEADER`]; undefined values become empty fields.
pub fn render_csv(rows: &[SweepRow]) -> Result<String, OutputError> {
    if rows.is_empty() {
        return Err(OutputError::EmptyRows);
    }
    let mut out = String::with_capacity(rows.len() * 200);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [
            r.tag(),
            opt_real(r.p0),
            opt_real(r.c01),
            opt_real(r.c10),
            format_real(r.sigma_p),
            format_real(r.sigma_c01),
            format_real(r.sigma_c10),
            opt_real(r.delta),
            opt_real(r.l_star),
            opt_real(r.var_delta_hat),
            format_real(r.p_err_analytic),
            format_real(r.delta_inc_analytic),
            opt_real(r.norm_inc_analytic),
            opt_real(r.p_err_mc),
            opt_real(r.delta_inc_mc),
            opt_real(r.norm_inc_mc),
            r.trials.to_string(),
            r.seed.to_string(),
            r.clamped.map(|c| c.to_string()).unwrap_or_default(),
            r.truncations.map(|t| t.to_string()).unwrap_or_default(),
        ];
        let _ = writeln!(out, "{}", fields.join(","));
    }
    Ok(out)
}

pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<(), OutputError> {
    write_file(path, &render_csv(rows)?)
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    seed: u64,
    trials: u64,
    rows: &'a [SweepRow],
}

pub fn render_json(rows: &[SweepRow], seed: u64, trials: u64) -> Result<String, OutputError> {
    if rows.is_empty() {
        return Err(OutputError::EmptyRows);
    }
    let mut s = serde_json::to_string_pretty(&JsonDocument { seed, trials, rows })?;
    s.push('\n');
    Ok(s)
}

pub fn emit_json(rows: &[SweepRow], seed: u64, trials: u64, path: &Path) -> Result<(), OutputError> {
    write_file(path, &render_json(rows, seed, trials)?)
}
