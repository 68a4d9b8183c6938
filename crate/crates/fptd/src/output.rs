//! CSV and JSON-sidecar output.
//!
//! Numbers are printed with 17 significant decimal digits (`{:.16e}`), which
//! is always enough to reproduce the exact `f64` bit pattern on re-parsing.
//! Two runs with the same inputs therefore produce byte-identical files, and
//! a written file can be read back with zero loss.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use fptd_core::estimator::{CdfEstimate, DensityEstimate};
use fptd_core::JumpDiffusionModel;
use serde::{Deserialize, Serialize};

/// Formats one `f64` with 17 significant digits.
fn cell(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per grid time: `t,f_hat,std_err`.
pub fn density_csv(est: &DensityEstimate) -> String {
    let mut out = String::from("t,f_hat,std_err\n");
    for k in 0..est.t_grid.len() {
        out.push_str(&cell(est.t_grid[k]));
        out.push(',');
        out.push_str(&cell(est.f_hat[k]));
        out.push(',');
        out.push_str(&cell(est.std_err[k]));
        out.push('\n');
    }
    out
}

/// One row per grid time: `t,p_hat,std_err`.
pub fn cdf_csv(est: &CdfEstimate) -> String {
    let mut out = String::from("t,p_hat,std_err\n");
    for k in 0..est.t_grid.len() {
        out.push_str(&cell(est.t_grid[k]));
        out.push(',');
        out.push_str(&cell(est.p_hat[k]));
        out.push(',');
        out.push_str(&cell(est.std_err[k]));
        out.push('\n');
    }
    out
}

/// Parses a three-column CSV written by [`density_csv`] or [`cdf_csv`] back
/// into `(t, value, std_err)` rows. Round-trips are bit-exact.
pub fn read_csv(path: &Path) -> io::Result<Vec<(f64, f64, f64)>> {
    let text = fs::read_to_string(path)?;
    parse_csv(&text)
}

/// Parses CSV text (header plus rows of three numbers).
pub fn parse_csv(text: &str) -> io::Result<Vec<(f64, f64, f64)>> {
    let bad = |line: usize, why: &str| {
        io::Error::new(
            io::ErrorKind::InvalidData,
            format!("CSV line {}: {why}", line + 1),
        )
    };
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if !(line == "t,f_hat,std_err" || line == "t,p_hat,std_err") {
                return Err(bad(i, "unrecognized header"));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(bad(i, "expected three columns"));
        }
        let mut vals = [0.0f64; 3];
        for (j, c) in cols.iter().enumerate() {
            vals[j] = c.parse().map_err(|_| bad(i, "not a number"))?;
        }
        rows.push((vals[0], vals[1], vals[2]));
    }
    Ok(rows)
}

/// Reproducibility metadata written next to a CSV as `<out>.json`.
///
/// `wall_time_s` is the one field that legitimately differs between reruns;
/// everything else must be identical for identical inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub model: JumpDiffusionModel,
    pub x: f64,
    pub n_paths: u64,
    pub seed: u64,
    pub wall_time_s: f64,
    /// Density value at `t = 0+` from the closed form (not estimated).
    pub f_zero: f64,
}

/// Path of the sidecar belonging to an output file: `<out>.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Writes the CSV and its sidecar; returns the sidecar path.
pub fn write_with_sidecar(out: &Path, csv: &str, sidecar: &Sidecar) -> io::Result<PathBuf> {
    fs::write(out, csv)?;
    let sc_path = sidecar_path(out);
    let mut text = serde_json::to_string_pretty(sidecar).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(&sc_path, text)?;
    Ok(sc_path)
}

/// Reads a sidecar back.
pub fn read_sidecar(path: &Path) -> io::Result<Sidecar> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(io::Error::other)
}
