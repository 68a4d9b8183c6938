//! Command line companion to `fptd-core`.
//!
//! The core crate is `no_std` and pure; everything that touches an OS lives
//! here: JSON model configs, time-grid specs, CSV/JSON output, a scoped-thread
//! driver that reproduces the core's sequential results bit for bit, and the
//! named runtime validation suite behind `fptd validate` / `fptd selftest`.

pub mod config;
pub mod output;
pub mod parallel;
pub mod validate;
