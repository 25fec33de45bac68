//! `circrx`: sweeps, balance tuning, noise reports, time-domain oracle runs,
//! the full-duplex demo and link budgets, each writing files plus a manifest.

mod artifacts;
mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "circrx", version, about = "N-path circulator-receiver models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON parameter document, or a manifest.json from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Format of tabular outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum LptvAction {
    /// One excitation: waveforms and node phasors.
    #[default]
    Simulate,
    /// Plain N-path mixer gain against the closed form.
    Eq2Check,
    /// Circulator node transfers at f_lo against the closed forms.
    Compare,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Isolation, gain and loss over frequency, plus a Touchstone file.
    Sweep,
    /// Exhaustive RC-bank tuning for TX-to-BB isolation.
    Balance,
    /// Noise coefficients and NF versus balance impedance.
    Noise,
    /// Time-domain oracle runs.
    Lptv {
        #[arg(value_enum, default_value_t)]
        action: LptvAction,
    },
    /// End-to-end full-duplex demo with digital cancellation.
    Demo,
    /// Link budget and range.
    Link,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let ctx = commands::Context { config: cli.config.as_deref(), seed: cli.seed, format: cli.format };
    let out = match cli.command {
        Command::Sweep => commands::sweep(&ctx)?,
        Command::Balance => commands::balance(&ctx)?,
        Command::Noise => commands::noise(&ctx)?,
        Command::Lptv { action } => commands::lptv(&ctx, action)?,
        Command::Demo => commands::demo(&ctx)?,
        Command::Link => commands::link(&ctx)?,
    };
    for name in out.commit(&cli.out)? {
        println!("{}", cli.out.join(name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
