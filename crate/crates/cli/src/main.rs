mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qpi_core::Error;

#[derive(Parser, Serialize)]
#[command(name = "qpi", version, about = "Exact laws, Weingarten tables and partial isometry models")]
pub struct Cli {
    #[command(flatten)]
    #[serde(flatten)]
    pub global: Global,
    #[command(subcommand)]
    #[serde(flatten)]
    pub command: Command,
}

#[derive(Args, Serialize)]
pub struct Global {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads for Monte Carlo runs. Output does not depend on it.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// JSON file with flag values; command-line flags take precedence.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<std::path::PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// List partial permutations of {1..N} signed by x-th roots of unity.
    Enumerate(commands::EnumerateArgs),
    /// Exact law of the truncated character.
    Law(commands::LawArgs),
    /// Gram/Weingarten tables and moment integrals.
    Weingarten(commands::WeingartenArgs),
    /// Compare classical and free cumulants.
    Bp(commands::BpArgs),
    /// Haar samples of partial isometries and Monte Carlo laws.
    Sample(commands::SampleArgs),
    /// Matrix model and relation checks.
    ModelCheck(commands::ModelCheckArgs),
    /// Run acceptance criteria.
    Verify(commands::VerifyArgs),
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parameter(_) | Error::Dimension(_) | Error::Parse(_) | Error::Order(_) => 2,
        Error::Guard(_) | Error::UnsupportedEnumeration | Error::MissingMoment(_) => 3,
        Error::SingularGram { .. } => 4,
        Error::Validation { .. } => 5,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match exit_code(e) {
        2 => "parameter",
        3 => "guard",
        4 => "singular",
        _ => "validation",
    }
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error (parameter): {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    if let Some(t) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error (parameter): --threads: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli).and_then(|report| output::emit(&cli, &report).map(|()| report)) {
        Ok(report) => match report.failure {
            None => ExitCode::SUCCESS,
            Some(what) => {
                eprintln!("error (validation): {what}");
                ExitCode::from(5)
            }
        },
        Err(e) => {
            eprintln!("error ({}): {e}", error_kind(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
