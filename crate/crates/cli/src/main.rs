mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qglab::LabError;

#[derive(Debug, Parser)]
#[command(name = "qglab", version, about = "Spectral laboratory for linearized dissipative QG operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat key = value file; `[command]` sections override the globals.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for parallel sweeps and suites.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Override a config value; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Integrate one model and write the energy functionals along the trajectory.
    Simulate,
    /// Run the identity and inequality suite.
    Verify,
    /// Eigenvalues and least-damped mode of the frozen generator.
    Spectrum,
    /// Rate sweep over viscosities and power-law fit.
    Sweep,
    /// Estimate the constants and the decay-functional coefficients.
    Constants,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Verify => "verify",
            Command::Spectrum => "spectrum",
            Command::Sweep => "sweep",
            Command::Constants => "constants",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Exit 2.
    Config(String),
    /// Exit 3.
    Runtime(String),
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::InvalidGrid(_) | LabError::InvalidParams(_) | LabError::ShearTooWide { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Command result that is not an error: success or a failed verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failed,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let run = || -> Result<Outcome, CliError> {
        let mut overrides = Vec::new();
        if let Some(s) = cli.seed {
            overrides.push(format!("seed={s}"));
        }
        if let Some(w) = cli.workers {
            overrides.push(format!("workers={w}"));
        }
        overrides.extend(cli.set.iter().cloned());
        let mut settings = config::Settings::load(cli.config.as_deref(), cli.command.name(), &overrides)?;
        if let Some(w) = settings.optional::<usize>("workers")? {
            if w == 0 {
                return Err(CliError::Config("workers must be at least 1".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build_global()
                .map_err(|e| CliError::Runtime(e.to_string()))?;
        }
        let ctx = commands::Context::new(cli.command.name(), cli.out.clone(), settings);
        match cli.command {
            Command::Simulate => commands::simulate(ctx),
            Command::Verify => commands::verify(ctx),
            Command::Spectrum => commands::spectrum(ctx),
            Command::Sweep => commands::sweep(ctx),
            Command::Constants => commands::constants(ctx),
        }
    };
    match run() {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(CliError::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("runtime error: {m}");
            ExitCode::from(3)
        }
    }
}
