//! Scoped-thread driver over the core's fixed path chunks.
//!
//! The core estimators are pure functions of `(model, parameters, seed)` with
//! a fixed chunk layout and an ascending merge. Workers here claim chunk
//! indices from an atomic counter and compute them in whatever order the
//! scheduler allows, but results are stored by index and merged in ascending
//! order afterwards, so the final estimate is bit-for-bit identical to the
//! sequential one no matter how many threads run. `--threads` is a throughput
//! knob, never an accuracy or reproducibility knob.

use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use fptd_core::error::{Error, Result};
use fptd_core::estimator::{
    self, CdfAccumulator, CdfEstimate, DefectEstimate, DefectVerdict, DensityAccumulator,
    DensityEstimate, Welford,
};
use fptd_core::{JumpDiffusionModel, Level};

/// Worker count: explicit flag, else the `FPTD_THREADS` environment variable,
/// else the machine's available parallelism, else 1. Values are clamped to at
/// least 1; an unparsable environment value is ignored.
pub fn resolve_threads(flag: Option<usize>) -> usize {
    if let Some(t) = flag {
        return t.max(1);
    }
    if let Ok(raw) = std::env::var("FPTD_THREADS") {
        if let Ok(t) = raw.trim().parse::<usize>() {
            if t >= 1 {
                return t;
            }
        }
    }
    thread::available_parallelism()
        .map(NonZeroUsize::get)
        .unwrap_or(1)
}

/// Runs `compute` over all chunk indices on `threads` workers and returns the
/// per-chunk results in ascending chunk order.
fn run_chunks<T, F>(n_chunks: usize, threads: usize, compute: F) -> Vec<Result<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let workers = threads.min(n_chunks).max(1);
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<T>>>> =
        (0..n_chunks).map(|_| Mutex::new(None)).collect();
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= n_chunks {
                    break;
                }
                let res = compute(idx);
                *slots[idx].lock().expect("chunk slot poisoned") = Some(res);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .expect("chunk slot poisoned")
                .expect("every chunk index is claimed by exactly one worker")
        })
        .collect()
}

fn check_paths(n_paths: u64) -> Result<()> {
    if n_paths < 2 {
        return Err(Error::invalid("n_paths", "need at least 2 paths"));
    }
    Ok(())
}

/// [`estimator::estimate_density`] on `threads` workers; identical output.
pub fn density(
    model: &JumpDiffusionModel,
    x: Level,
    t_grid: &[f64],
    n_paths: u64,
    master_seed: u64,
    threads: usize,
) -> Result<DensityEstimate> {
    if threads <= 1 {
        return estimator::estimate_density(model, x, t_grid, n_paths, master_seed);
    }
    check_paths(n_paths)?;
    let ranges = estimator::chunk_ranges(n_paths);
    let chunks = run_chunks(ranges.len(), threads, |idx| {
        estimator::density_chunk(model, x, t_grid, ranges[idx].clone(), master_seed)
    });
    let mut acc = DensityAccumulator::new(t_grid.len());
    for chunk in chunks {
        acc.merge(&chunk?);
    }
    Ok(DensityEstimate {
        model: model.clone(),
        x,
        t_grid: t_grid.to_vec(),
        f_hat: acc.cells().iter().map(Welford::mean).collect(),
        std_err: acc.cells().iter().map(Welford::std_err).collect(),
        n_paths,
        master_seed,
    })
}

/// [`estimator::estimate_cdf`] on `threads` workers; identical output.
pub fn cdf(
    model: &JumpDiffusionModel,
    x: Level,
    t_grid: &[f64],
    n_paths: u64,
    master_seed: u64,
    threads: usize,
) -> Result<CdfEstimate> {
    if threads <= 1 {
        return estimator::estimate_cdf(model, x, t_grid, n_paths, master_seed);
    }
    check_paths(n_paths)?;
    let ranges = estimator::chunk_ranges(n_paths);
    let chunks = run_chunks(ranges.len(), threads, |idx| {
        estimator::cdf_chunk(model, x, t_grid, ranges[idx].clone(), master_seed)
    });
    let mut acc = CdfAccumulator::new(t_grid.len());
    for chunk in chunks {
        acc.merge(&chunk?);
    }
    let n = acc.n_paths() as f64;
    let p_hat: Vec<f64> = acc.hits().iter().map(|&h| h as f64 / n).collect();
    let std_err = p_hat.iter().map(|&p| (p * (1.0 - p) / n).sqrt()).collect();
    Ok(CdfEstimate {
        model: model.clone(),
        x,
        t_grid: t_grid.to_vec(),
        p_hat,
        std_err,
        hits: acc.hits().to_vec(),
        n_paths,
        master_seed,
    })
}

/// [`estimator::estimate_defect`] on `threads` workers; identical output.
pub fn defect(
    model: &JumpDiffusionModel,
    x: Level,
    horizon: f64,
    n_paths: u64,
    master_seed: u64,
    threads: usize,
) -> Result<DefectEstimate> {
    if threads <= 1 {
        return estimator::estimate_defect(model, x, horizon, n_paths, master_seed);
    }
    check_paths(n_paths)?;
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::domain(
            "estimate_defect",
            "horizon must be positive and finite",
        ));
    }
    let ranges = estimator::chunk_ranges(n_paths);
    let chunks = run_chunks(ranges.len(), threads, |idx| {
        estimator::defect_chunk(model, x, horizon, ranges[idx].clone(), master_seed)
    });
    let mut survivors = 0u64;
    for chunk in chunks {
        survivors += chunk?;
    }
    let n = n_paths as f64;
    let defect_hat = survivors as f64 / n;
    let std_err = (defect_hat * (1.0 - defect_hat) / n).sqrt();
    let drift_index = model.drift_index();
    let verdict = if drift_index < 0.0 {
        DefectVerdict::Defective
    } else {
        DefectVerdict::FiniteAlmostSurely
    };
    let defect_detected = defect_hat > 3.0 * std_err;
    Ok(DefectEstimate {
        x,
        horizon,
        n_paths,
        master_seed,
        survivors,
        defect_hat,
        std_err,
        drift_index,
        verdict,
        defect_detected,
        horizon_too_short: verdict == DefectVerdict::FiniteAlmostSurely && defect_detected,
    })
}
