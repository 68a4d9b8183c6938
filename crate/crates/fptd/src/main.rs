//! `fptd`: first-passage times of a jump diffusion from the command line.
//!
//! Exit codes: 0 success, 1 failed validation check (or output IO failure),
//! 2 malformed command line or config file, 3 domain error (bad level, bad
//! horizon, inapplicable model). Clap's own usage errors also exit with 2.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use fptd::config::{self, ConfigError};
use fptd::output::{self, Sidecar};
use fptd::parallel;
use fptd::validate::{self, ValidateOptions};
use fptd_core::closed_form::f_zero;
use fptd_core::estimator::DefectVerdict;
use fptd_core::Level;

#[derive(Parser)]
#[command(
    name = "fptd",
    version,
    about = "First-passage time law of a jump diffusion: simulation-based estimates, closed forms, and a self-validation suite"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the hitting-time density on a time grid
    Density(RunArgs),
    /// Estimate the hitting-time CDF on a time grid
    Cdf(RunArgs),
    /// Estimate the probability of never reaching the level
    Defect(DefectArgs),
    /// Run the named self-validation checks at full size
    Validate(ValidateArgs),
    /// Run the same checks at a tenth of the Monte Carlo size
    Selftest(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON model config file
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Barrier level, must be > 0
    #[arg(long, allow_negative_numbers = true)]
    x: f64,
    /// Time grid: "start:stop:step" or comma-separated values
    #[arg(long = "t-grid", value_name = "SPEC")]
    t_grid: String,
    /// Number of simulated paths
    #[arg(long, default_value_t = 100_000)]
    paths: u64,
    /// Master seed; fixes every random draw
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write CSV here plus a JSON sidecar at <PATH>.json; stdout if absent
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads; defaults to FPTD_THREADS, then available parallelism.
    /// Never changes output bytes, only speed.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct DefectArgs {
    /// JSON model config file
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Barrier level, must be > 0
    #[arg(long, allow_negative_numbers = true)]
    x: f64,
    /// Horizon: paths that never reach the level by this time count as
    /// survivors
    #[arg(long, allow_negative_numbers = true)]
    horizon: f64,
    /// Number of simulated paths
    #[arg(long, default_value_t = 100_000)]
    paths: u64,
    /// Master seed; fixes every random draw
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the full defect record as JSON here
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads; defaults to FPTD_THREADS, then available parallelism
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Base seed for the Monte Carlo checks: changes digits, never verdicts
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Test-only mutation hook: scale the envelope constant c_eps
    #[arg(long = "perturb-c-eps", hide = true)]
    perturb_c_eps: Option<f64>,
}

/// A command failure with its exit code.
enum Failure {
    Config(String),
    Domain(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Domain(_) => 3,
            Failure::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Domain(m) | Failure::Io(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<fptd_core::Error> for Failure {
    fn from(e: fptd_core::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn cmd_density(args: &RunArgs) -> Result<(), Failure> {
    let model = config::load_model(&args.config)?;
    let grid = config::parse_grid(&args.t_grid)?;
    config::check_paths(args.paths)?;
    let x = Level::new(args.x)?;
    let threads = parallel::resolve_threads(args.threads);
    let started = Instant::now();
    let est = parallel::density(&model, x, &grid, args.paths, args.seed, threads)?;
    let wall_time_s = started.elapsed().as_secs_f64();
    let csv = output::density_csv(&est);
    match &args.out {
        Some(out) => {
            let sidecar = Sidecar {
                model: est.model.clone(),
                x: x.get(),
                n_paths: est.n_paths,
                seed: est.master_seed,
                wall_time_s,
                f_zero: f_zero(x, &model),
            };
            output::write_with_sidecar(out, &csv, &sidecar)?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_cdf(args: &RunArgs) -> Result<(), Failure> {
    let model = config::load_model(&args.config)?;
    let grid = config::parse_grid(&args.t_grid)?;
    config::check_paths(args.paths)?;
    let x = Level::new(args.x)?;
    let threads = parallel::resolve_threads(args.threads);
    let started = Instant::now();
    let est = parallel::cdf(&model, x, &grid, args.paths, args.seed, threads)?;
    let wall_time_s = started.elapsed().as_secs_f64();
    let csv = output::cdf_csv(&est);
    match &args.out {
        Some(out) => {
            let sidecar = Sidecar {
                model: est.model.clone(),
                x: x.get(),
                n_paths: est.n_paths,
                seed: est.master_seed,
                wall_time_s,
                f_zero: f_zero(x, &model),
            };
            output::write_with_sidecar(out, &csv, &sidecar)?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_defect(args: &DefectArgs) -> Result<(), Failure> {
    let model = config::load_model(&args.config)?;
    config::check_paths(args.paths)?;
    let x = Level::new(args.x)?;
    let threads = parallel::resolve_threads(args.threads);
    let est = parallel::defect(&model, x, args.horizon, args.paths, args.seed, threads)?;

    let mut stdout = std::io::stdout().lock();
    let emit = |w: &mut dyn Write| -> std::io::Result<()> {
        writeln!(w, "x = {}", est.x.get())?;
        writeln!(w, "horizon = {}", est.horizon)?;
        writeln!(w, "paths = {}", est.n_paths)?;
        writeln!(w, "survivors = {}", est.survivors)?;
        writeln!(w, "drift_index = {}", est.drift_index)?;
        writeln!(w, "defect_hat = {} +/- {}", est.defect_hat, est.std_err)?;
        match est.verdict {
            DefectVerdict::Defective => writeln!(
                w,
                "verdict: defective (m + a*E[Y] = {} < 0)",
                est.drift_index
            )?,
            DefectVerdict::FiniteAlmostSurely => writeln!(
                w,
                "verdict: finite a.s. (m + a*E[Y] = {} >= 0)",
                est.drift_index
            )?,
        }
        if est.horizon_too_short {
            writeln!(
                w,
                "warning: a nonzero defect was measured although the drift index is \
                 nonnegative; the horizon is too short to see the eventual hit"
            )?;
        }
        Ok(())
    };
    emit(&mut stdout)?;

    if let Some(out) = &args.out {
        let mut text = serde_json::to_string_pretty(&est)
            .map_err(|e| Failure::Io(e.to_string()))?;
        text.push('\n');
        std::fs::write(out, text)?;
    }
    Ok(())
}

fn cmd_validate(args: &ValidateArgs, scale: f64) -> u8 {
    let opts = ValidateOptions {
        seed: args.seed,
        scale,
        c_eps_factor: args.perturb_c_eps.unwrap_or(1.0),
    };
    let mut stdout = std::io::stdout().lock();
    match validate::run_all(&opts, &mut stdout) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: cannot write the validation report: {e}");
            1
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Density(args) => cmd_density(args),
        Command::Cdf(args) => cmd_cdf(args),
        Command::Defect(args) => cmd_defect(args),
        Command::Validate(args) => return ExitCode::from(cmd_validate(args, 1.0)),
        Command::Selftest(args) => return ExitCode::from(cmd_validate(args, 0.1)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
