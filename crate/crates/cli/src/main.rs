//! Command-line driver: every experiment is a subcommand writing a CSV
//! data file plus a JSON sidecar with the config echo, tool version, and
//! error budgets.  Exit codes: 0 success, 1 validation failure, 2 capacity
//! exceeded, 3 check failure under `--check`.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use config::RunConfig;
use cubicdist::checks::{self, CheckOutcome};
use cubicdist::{Error, Result};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "cubicdist",
    version,
    about = "Numerical laboratory for the two-dimensional value distribution of cubic Hecke L-functions"
)]
struct Cli {
    /// JSON config file mirroring the flags; flags override the file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Real part of the evaluation point (> 1/2).
    #[arg(long, global = true)]
    sigma: Option<f64>,

    /// Imaginary part of the evaluation point.
    #[arg(long, global = true)]
    t: Option<f64>,

    /// 1 evaluates log L, 2 evaluates L'/L.
    #[arg(long, global = true)]
    case: Option<u8>,

    /// Prime-norm cutoff for Euler products and coefficient series.
    #[arg(long, global = true)]
    cutoff_prime: Option<u64>,

    /// Norm bound for family sweeps and count ladders.
    #[arg(long, global = true)]
    family_bound: Option<u64>,

    /// Grid radius: evaluation points for charfn, frequency disk for
    /// density and compare.
    #[arg(long, global = true)]
    grid_radius: Option<f64>,

    /// Grid step between charfn evaluation points.
    #[arg(long, global = true)]
    grid_step: Option<f64>,

    /// Seed for sampler draws and density pilot samples.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Draw count for sample and compare.
    #[arg(long, global = true)]
    draws: Option<u64>,

    /// Evaluation-point magnitude |y| for the decay window report.
    #[arg(long, global = true)]
    y_abs: Option<f64>,

    /// Output path for the CSV data file; the JSON sidecar lands next to
    /// it as <out>.meta.json.  Defaults to <subcommand>.csv.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Rayon thread budget; 0 uses every core.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Run the acceptance checks covering this subcommand instead of the
    /// experiment; exits 3 if any check fails.
    #[arg(long, global = true)]
    check: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Characteristic function on a grid of evaluation points.
    Charfn,
    /// Invert the characteristic function into a joint density grid.
    Density,
    /// Draw from the truncated infinite convolution.
    Sample,
    /// Evaluate log L or L'/L across the whole family.
    Sweep,
    /// Discrepancy report of sampler draws against the inverted density.
    Compare,
    /// Euler-factor modulus window report plus decay-exponent regression.
    Decay,
    /// Smoothed family count ladder against the derived constant.
    Count,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Charfn => "charfn",
            Command::Density => "density",
            Command::Sample => "sample",
            Command::Sweep => "sweep",
            Command::Compare => "compare",
            Command::Decay => "decay",
            Command::Count => "count",
        }
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let benign = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if benign { 0 } else { 1 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity(_) => 2,
        _ => 1,
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    apply_flags(&mut config, cli);
    config.validate()?;

    if config.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build_global()
            .map_err(|e| Error::invalid(format!("thread pool: {}", e)))?;
    }

    if cli.check {
        return run_checks(cli.command);
    }

    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", cli.command.name())));
    match cli.command {
        Command::Charfn => commands::charfn(&config, &out)?,
        Command::Density => commands::density(&config, &out)?,
        Command::Sample => commands::sample(&config, &out)?,
        Command::Sweep => commands::sweep(&config, &out)?,
        Command::Compare => commands::compare(&config, &out)?,
        Command::Decay => commands::decay(&config, &out)?,
        Command::Count => commands::count(&config, &out)?,
    }
    Ok(0)
}

fn apply_flags(config: &mut RunConfig, cli: &Cli) {
    if let Some(v) = cli.sigma {
        config.sigma = v;
    }
    if let Some(v) = cli.t {
        config.t = v;
    }
    if let Some(v) = cli.case {
        config.case = v;
    }
    if let Some(v) = cli.cutoff_prime {
        config.cutoff_prime = v;
    }
    if let Some(v) = cli.family_bound {
        config.family_bound = v;
    }
    if let Some(v) = cli.grid_radius {
        config.grid_radius = Some(v);
    }
    if let Some(v) = cli.grid_step {
        config.grid_step = Some(v);
    }
    if let Some(v) = cli.seed {
        config.seed = v;
    }
    if let Some(v) = cli.draws {
        config.draws = v;
    }
    if let Some(v) = cli.y_abs {
        config.y_abs = v;
    }
    if let Some(v) = cli.threads {
        config.threads = v;
    }
}

fn run_checks(command: Command) -> Result<i32> {
    type Check = fn() -> Result<CheckOutcome>;
    let suite: &[Check] = match command {
        Command::Charfn => &[
            checks::criterion_1,
            checks::criterion_6,
            checks::criterion_7,
        ],
        Command::Decay => &[checks::criterion_2, checks::criterion_3],
        Command::Density => &[checks::criterion_4],
        Command::Sample | Command::Compare => &[checks::criterion_5],
        Command::Sweep => &[checks::criterion_8, checks::criterion_10],
        Command::Count => &[checks::criterion_9],
    };
    let mut all_passed = true;
    for check in suite {
        let outcome = check()?;
        println!(
            "[{}] {}: {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.name,
            outcome.details
        );
        all_passed &= outcome.passed;
    }
    Ok(if all_passed { 0 } else { 3 })
}
