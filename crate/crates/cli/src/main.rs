//! `ccdt`: waveform property checks, ambiguity surfaces, PAPR sweeps and
//! detection experiments.

mod commands;
mod config;
mod error;

use clap::{Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use config::Config;
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "ccdt", version, about = "Chirp-convolved multicarrier waveform toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Tolerance for every property checked by `verify`.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Monte-Carlo trials per point for `acquire` and `track`.
    #[arg(long, global = true)]
    trials: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Check ambiguity-function shapes and PAPR properties.
    Verify,
    /// Ambiguity surface as CSV.
    Af,
    /// PAPR of a sequence family, sorted per waveform.
    Papr,
    /// Timing acquisition over a fading channel.
    Acquire,
    /// Delay/Doppler estimation of the strongest radar target.
    Track,
}

fn load(cli: &Cli) -> Result<Config, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(tol) = cli.tol {
        config.verify.tol = Some(tol);
    }
    if let Some(trials) = cli.trials {
        config.acquire.trials = trials;
        config.track.trials = trials;
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = load(cli)?;
    let output = match cli.command {
        Command::Verify => commands::verify(&config)?,
        Command::Af => commands::af(&config)?,
        Command::Papr => commands::papr(&config)?,
        Command::Acquire => commands::acquire(&config)?,
        Command::Track => commands::track(&config)?,
    };
    match &cli.out {
        Some(path) => std::fs::write(path, &output.text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?,
        None => std::io::stdout()
            .write_all(&output.text)
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            })?,
    }
    match output.failure {
        Some(msg) => Err(CliError::PropertyFailure(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ccdt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
