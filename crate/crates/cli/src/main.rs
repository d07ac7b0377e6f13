mod args;
mod ensemble;
mod error;
mod output;
mod search;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::{usage, CliError, CliResult};
use output::RunManifest;

/// Geometric Brownian motion with independent entry and exit rates.
///
/// Every command writes a CSV (17 significant digits) and a `.manifest.json`
/// beside it; most also write a `.summary.json`. Exit status is 0 on
/// success, 1 on numerical failure and 2 on invalid parameters.
#[derive(Parser, Debug)]
#[command(name = "gbmflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stationary per-unit density, optionally with a simulated histogram.
    Stationary(ensemble::StationaryArgs),
    /// Per-unit density at a finite time.
    Density(ensemble::DensityArgs),
    /// Mean and mean-squared displacement over time.
    Moments(ensemble::MomentsArgs),
    /// Mean and mean-squared displacement of log x over time.
    Logmoments(ensemble::MomentsArgs),
    /// Edges of the typical region x0 exp(+-y* t).
    Boundary(ensemble::BoundaryArgs),
    /// First-passage density of a lone or open searcher population.
    Fpt(search::FptArgs),
    /// Mean first-passage time against lambda_m at fixed alpha = lambda_r/lambda_m.
    Mfpt(search::MfptArgs),
    /// Optimal resetting MFPT over optimal open-population MFPT against alpha.
    Speedup(search::SpeedupArgs),
    /// Expected unit count, closed form against exact birth-death simulation.
    Population(ensemble::PopulationArgs),
    /// Raw Monte Carlo samples.
    Simulate(simulate::SimulateArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Args, Debug)]
struct ReplayArgs {
    manifest: PathBuf,
    /// Write to this path instead of the recorded one.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(command: &Command, argv: &[String]) -> CliResult<()> {
    match command {
        Command::Stationary(a) => ensemble::stationary(a, argv),
        Command::Density(a) => ensemble::density(a, argv),
        Command::Moments(a) => ensemble::moments(a, argv),
        Command::Logmoments(a) => ensemble::logmoments(a, argv),
        Command::Boundary(a) => ensemble::boundary(a, argv),
        Command::Fpt(a) => search::fpt(a, argv),
        Command::Mfpt(a) => search::mfpt(a, argv),
        Command::Speedup(a) => search::speedup(a, argv),
        Command::Population(a) => ensemble::population(a, argv),
        Command::Simulate(a) => simulate::simulate(a, argv),
        Command::Replay(a) => replay(a),
    }
}

/// `argv` with the value of `--out` replaced.
fn with_out(argv: &[String], out: &str) -> Vec<String> {
    let mut result = Vec::with_capacity(argv.len());
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--out" {
            it.next();
        } else if !a.starts_with("--out=") {
            result.push(a.clone());
        }
    }
    result.push("--out".into());
    result.push(out.into());
    result
}

fn replay(a: &ReplayArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&a.manifest)?;
    let manifest: RunManifest = serde_json::from_str(&text)?;
    let argv = match &a.out {
        Some(out) => with_out(&manifest.argv, &out.to_string_lossy()),
        None => manifest.argv.clone(),
    };
    let cli = Cli::try_parse_from(std::iter::once("gbmflow".to_owned()).chain(argv.iter().cloned()))
        .map_err(|e| CliError::Usage(format!("manifest arguments no longer parse: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return usage("a manifest cannot record a replay");
    }
    run(&cli.command, &argv)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match run(&cli.command, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gbmflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
