//! `affest`: scans, likelihood comparisons, asymptotic tables, two-mode
//! studies and the validation suite.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "affest", version, about = "Covariant joint estimation of displacement and squeezing")]
struct Cli {
    /// TOML file with flat `key = value` settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one setting, e.g. `--set a=6`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Scan the estimate density: CSV to `csv_path`, JSON summary to stdout.
    Density,
    /// Maximum likelihood of the configured seed.
    Likelihood,
    /// Optimal versus square-root likelihood.
    CompareSrm,
    /// Asymptotic error laws and the model density.
    Asymptotics,
    /// Two-mode pointer concentration profile.
    TwoMode,
    /// Run the invariant suite.
    Validate,
}

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Output(String),
}

impl From<affine_estimation::Error> for CliError {
    fn from(e: affine_estimation::Error) -> Self {
        match e {
            affine_estimation::Error::InvalidArgument(msg) => CliError::Config(msg),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl CliError {
    fn report(&self) -> ExitCode {
        let (tag, msg, code) = match self {
            CliError::Config(m) => ("config error", m, 2),
            CliError::Output(m) => ("output error", m, 2),
            CliError::Numeric(m) => ("numeric failure", m, 3),
        };
        eprintln!("affest: {tag}: {msg}");
        ExitCode::from(code)
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let config = RunConfig::load(cli.config.as_deref(), &cli.sets)?;
    if cli.print_config {
        print!("{}", config.to_toml());
        return Ok(ExitCode::SUCCESS);
    }
    let Some(command) = cli.command else {
        return Err(CliError::Config("no subcommand given (see --help)".into()));
    };
    match command {
        Command::Density => commands::density(&config).map(|_| ()),
        Command::Likelihood => commands::likelihood(&config).map(|_| ()),
        Command::CompareSrm => commands::compare_srm(&config).map(|_| ()),
        Command::Asymptotics => commands::asymptotics(&config).map(|_| ()),
        Command::TwoMode => commands::two_mode(&config).map(|_| ()),
        Command::Validate => return Ok(if commands::validate(&config)? { ExitCode::SUCCESS } else { ExitCode::from(1) }),
    }?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => e.report(),
    }
}
