//! Command-line front end. Each subcommand runs one experiment, writes
//! `<name>.csv` and `<name>.json` into the output directory, and maps its
//! verdict onto the exit code: 0 pass, 1 configuration or runtime error,
//! 2 acceptance failure.

mod bench;
mod commands;
pub mod config;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use config::{parse_config, RunConfig};
pub use report::{Report, Table};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Run(#[from] crate::Error),
}

#[derive(Parser, Debug)]
#[command(name = "freqlab", version, about = "Frequency-domain fine-tuning lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Error ratios of the four approximators on Gaussian matrices.
    Theorem1(Flags),
    /// Top Fourier coefficients against top DCT coefficients.
    Theorem2(Flags),
    /// Low-rank error under equicorrelated entries and the critical rho.
    Noniid(Flags),
    /// Marchenko-Pastur outside mass of correlated matrices.
    Mp(Flags),
    /// Calibration of the perturbation-bootstrap normality test.
    Normality(Flags),
    /// Alternating training on the three-layer toy regression.
    Toy(Flags),
    /// Gradients against the trace-formula oracle and finite differences.
    Gradcheck(Flags),
    /// Wall time of the sparse, FFT and dense inverse DCT paths.
    Bench(Flags),
}

#[derive(Args, Debug, Clone)]
struct Flags {
    /// Master seed; every CSV row records it.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monte Carlo trials (matrices per repetition for `mp`, cases for
    /// `gradcheck`, timing repeats for `bench`).
    #[arg(long)]
    trials: Option<usize>,
    /// Matrix sizes, comma separated.
    #[arg(long = "K", value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// Ranks, comma separated.
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<usize>>,
    /// `start:stop:step` or a comma list of correlations.
    #[arg(long = "rho-grid", allow_hyphen_values = true)]
    rho_grid: Option<String>,
    /// Coefficient budgets, comma separated.
    #[arg(long, value_delimiter = ',')]
    budget: Option<Vec<usize>>,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Number of seeds or repetitions.
    #[arg(long)]
    seeds: Option<usize>,
    /// Reduced `noniid` run: rho in {0.06, 0.09, 0.12} with 50 trials.
    #[arg(long)]
    small: bool,
    /// Flat key=value manifest; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Command {
    fn split(self) -> (&'static str, Flags) {
        match self {
            Command::Theorem1(f) => ("theorem1", f),
            Command::Theorem2(f) => ("theorem2", f),
            Command::Noniid(f) => ("noniid", f),
            Command::Mp(f) => ("mp", f),
            Command::Normality(f) => ("normality", f),
            Command::Toy(f) => ("toy", f),
            Command::Gradcheck(f) => ("gradcheck", f),
            Command::Bench(f) => ("bench", f),
        }
    }
}

fn resolve(name: &str, f: Flags) -> Result<RunConfig, CliError> {
    let file = match &f.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => Default::default(),
    };
    let flags = config::Overrides {
        seed: f.seed,
        out: f.out,
        trials: f.trials,
        k: f.k,
        r: f.r,
        rho_grid: f.rho_grid,
        budget: f.budget,
        workers: f.workers,
        seeds: f.seeds,
        small: f.small,
    };
    RunConfig::resolve(name, flags, &file)
}

/// Runs one resolved configuration on a pool of `config.workers` threads
/// and writes its report.
pub fn execute(config: &RunConfig) -> Result<Report, CliError> {
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let report = pool.install(|| commands::dispatch(config))?;
    report.write(config, started.elapsed().as_secs_f64())?;
    Ok(report)
}

/// Parses `args` (including the program name) and runs the subcommand,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    let (name, flags) = cli.command.split();
    let result = resolve(name, flags).and_then(|c| execute(&c));
    match result {
        Ok(report) => {
            for line in &report.summary {
                println!("{line}");
            }
            println!("{name}: {}", if report.pass { "PASS" } else { "FAIL" });
            if report.pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("freqlab {name}: {e}");
            EXIT_CONFIG
        }
    }
}
