//! Run configuration: model files and time-grid specs.
//!
//! A model config is a JSON object deserializing to
//! [`fptd_core::JumpDiffusionModel`], e.g.
//!
//! ```json
//! { "m": -0.5, "a": 1.0, "jumps": { "type": "point_mass", "c": 1.0 } }
//! ```
//!
//! A time grid is either a comma-separated list (`"0.5,1,2"`) or a range
//! `"start:stop:step"` expanding to `start, start+step, ...` up to `stop`
//! (inclusive, with a relative tolerance so `0.1:5:0.1` really ends at 5).
//!
//! Everything here fails with [`ConfigError`], which the CLI maps to exit
//! code 2; domain errors from the core map to exit code 3.

use std::fs;
use std::path::Path;

use fptd_core::JumpDiffusionModel;

/// A malformed config file, grid spec, or command-line value.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse model JSON in {path}: {source}")]
    ModelJson {
        path: String,
        source: serde_json::Error,
    },
    #[error("invalid grid spec {spec:?}: {reason}")]
    Grid { spec: String, reason: String },
    #[error("invalid value for {field}: {reason}")]
    Value { field: &'static str, reason: String },
}

pub type Result<T> = core::result::Result<T, ConfigError>;

/// Loads and structurally parses a model config file.
///
/// Parameter-range validation (finite drift, `a >= 0`, weight sums, ...) is
/// the core's job and happens when the model is used; this only covers file
/// access and JSON shape.
pub fn load_model(path: &Path) -> Result<JumpDiffusionModel> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ConfigError::ModelJson {
        path: path.display().to_string(),
        source,
    })
}

fn grid_err(spec: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Grid {
        spec: spec.to_string(),
        reason: reason.into(),
    }
}

fn parse_number(spec: &str, token: &str) -> Result<f64> {
    let v: f64 = token
        .trim()
        .parse()
        .map_err(|_| grid_err(spec, format!("{token:?} is not a number")))?;
    if !v.is_finite() {
        return Err(grid_err(spec, format!("{token:?} is not finite")));
    }
    Ok(v)
}

/// Expands a grid spec into strictly increasing positive times.
///
/// `"start:stop:step"` produces `start + k * step` for `k = 0, 1, ...` while
/// the value stays below `stop + step * 1e-9` (so the endpoint survives float
/// rounding). Anything else is treated as a comma-separated explicit list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let trimmed = spec.trim();
    if trimmed.is_empty() {
        return Err(grid_err(spec, "empty spec"));
    }
    let grid = if trimmed.contains(':') {
        let parts: Vec<&str> = trimmed.split(':').collect();
        if parts.len() != 3 {
            return Err(grid_err(spec, "range form is start:stop:step"));
        }
        let start = parse_number(spec, parts[0])?;
        let stop = parse_number(spec, parts[1])?;
        let step = parse_number(spec, parts[2])?;
        if step <= 0.0 {
            return Err(grid_err(spec, format!("step must be > 0, got {step}")));
        }
        if stop < start {
            return Err(grid_err(
                spec,
                format!("stop {stop} is below start {start}"),
            ));
        }
        let limit = stop + step * 1e-9;
        let mut grid = Vec::new();
        // t = start + k * step, not an accumulating sum, so rounding cannot
        // drift across many steps.
        for k in 0u64.. {
            let t = start + (k as f64) * step;
            if t > limit {
                break;
            }
            grid.push(t);
        }
        grid
    } else {
        trimmed
            .split(',')
            .map(|tok| parse_number(spec, tok))
            .collect::<Result<Vec<f64>>>()?
    };
    if grid.is_empty() {
        return Err(grid_err(spec, "produces no grid points"));
    }
    if grid[0] <= 0.0 {
        return Err(grid_err(
            spec,
            format!("grid times must be > 0, got {}", grid[0]),
        ));
    }
    for k in 1..grid.len() {
        if grid[k] <= grid[k - 1] {
            return Err(grid_err(
                spec,
                format!(
                    "grid times must be strictly increasing ({} then {})",
                    grid[k - 1],
                    grid[k]
                ),
            ));
        }
    }
    Ok(grid)
}

/// Validates a `--paths` value at the config level (at least 1); the
/// estimators themselves additionally require 2 so variances exist, and
/// report that as a domain error rather than a config error.
pub fn check_paths(n_paths: u64) -> Result<u64> {
    if n_paths < 1 {
        return Err(ConfigError::Value {
            field: "--paths",
            reason: "need at least 1 path, got 0".to_string(),
        });
    }
    Ok(n_paths)
}

/// Validates a `--horizon` value (positive and finite).
pub fn check_horizon(horizon: f64) -> Result<f64> {
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(ConfigError::Value {
            field: "--horizon",
            reason: format!("must be positive and finite, got {horizon}"),
        });
    }
    Ok(horizon)
}
