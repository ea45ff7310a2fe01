//! Command-line surface. This is the only module that reads or writes files.
//!
//! Verbs: `solve`, `thresholds`, `scan`, `figure-data`, `simulate`. Exit
//! codes: 0 on success, 1 on I/O failure, 2 on bad input, 3 when the model
//! leaves the regime a computation needs (several non-discriminatory
//! equilibria where a unique one is required).

mod config;
mod figures;
mod report;
mod scan;
mod simulate;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::Error;

pub use config::{load_config, parse_config};
pub use figures::figure_data;
pub use report::{solve_report, thresholds_report, SolveReport, ThresholdsReport};
pub use scan::{parse_grid, scan_csv, Axis, AxisName, Spacing};
pub use simulate::{simulate_report, SimulateOptions, SimulateReport};

#[derive(Debug, Parser)]
#[command(
    name = "ratings-market",
    version,
    about = "Equilibria of a ratings-guided search market"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Every equilibrium at the configured parameters, with stability.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Directory for solve.json; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Elasticity, queue, belief, buyer-mass and rating-quality thresholds.
    Thresholds {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep over one or two of k, Q and beta; one CSV row per grid point.
    Scan {
        #[arg(long)]
        config: PathBuf,
        /// e.g. `beta=0.01:100:41:log` or `k=0.7:0.9:5,Q=0.05:0.1:4`.
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Curve data behind figure 1, 2 or 3.
    FigureData {
        #[arg(long)]
        figure: u32,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Flow integration and finite-population simulation at fixed queues.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "lambda-g")]
        lambda_g: f64,
        #[arg(long = "lambda-b")]
        lambda_b: f64,
        #[arg(long, default_value_t = 10_000)]
        sellers: usize,
        /// Horizon in units of 1/delta.
        #[arg(long, default_value_t = 500.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failure with its process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn regime(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError {
            code: 1,
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ViolatedBound { .. } | Error::InvalidArgument(_) | Error::DegenerateQueue => {
                CliError::input(e.to_string())
            }
            _ => CliError::regime(e.to_string()),
        }
    }
}

/// Formats a number with 17 significant digits, which round-trips any
/// `f64`. Non-finite values become an empty field.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

/// CSV field for an optional number.
pub(crate) fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

pub(crate) fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Writes `contents` to `dir/name`, or to stdout when `dir` is `None`.
pub(crate) fn emit(dir: Option<&Path>, name: &str, contents: &str) -> Result<(), CliError> {
    match dir {
        Some(dir) => write_file(dir, name, contents),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

pub(crate) fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { config, out } => {
            let params = load_config(&config)?;
            let report = solve_report(&params)?;
            emit(out.as_deref(), "solve.json", &to_json(&report))
        }
        Command::Thresholds { config, out } => {
            let params = load_config(&config)?;
            let report = thresholds_report(&params)?;
            emit(out.as_deref(), "thresholds.json", &to_json(&report))
        }
        Command::Scan { config, grid, out } => {
            let params = load_config(&config)?;
            let axes = parse_grid(&grid)?;
            let csv = scan_csv(&params, &axes)?;
            emit(out.as_deref(), "scan.csv", &csv)
        }
        Command::FigureData { figure, out } => {
            for (name, contents) in figure_data(figure)? {
                write_file(&out, &name, &contents)?;
            }
            Ok(())
        }
        Command::Simulate {
            config,
            lambda_g,
            lambda_b,
            sellers,
            horizon,
            seed,
            out,
        } => {
            let params = load_config(&config)?;
            let opts = SimulateOptions {
                lambda_g,
                lambda_b,
                sellers,
                horizon,
                seed,
            };
            let (report, trajectory) = simulate_report(&params, &opts)?;
            emit(out.as_deref(), "simulate.json", &to_json(&report))?;
            if let Some(dir) = out.as_deref() {
                write_file(dir, "trajectory.csv", &trajectory)?;
            }
            Ok(())
        }
    }
}
