//! `ocular` — command-line front end exposing every pipeline stage with
//! deterministic file-based I/O.
//!
//! Exit codes: 0 success, 1 usage error, 2 input error, 3 numerical
//! degeneracy under `--strict`.

mod commands;
mod output;

use clap::error::ErrorKind;
use clap::Parser;

use commands::{Cli, CommandOutcome};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

/// Command failure routed to an exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Input(m) => write!(f, "{m}"),
        }
    }
}

pub fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

pub fn usage_err(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            eprint!("{e}");
            std::process::exit(EXIT_USAGE);
        }
    };

    let strict = cli.strict;
    match commands::run(cli) {
        Ok(CommandOutcome { degenerate: Some(reason) }) if strict => {
            eprintln!("degenerate: {reason}");
            std::process::exit(EXIT_DEGENERATE);
        }
        Ok(CommandOutcome { degenerate }) => {
            if let Some(reason) = degenerate {
                eprintln!("warning: {reason}");
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.code());
        }
    }
}
