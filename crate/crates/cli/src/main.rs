//! `cms`: solve, inspect and verify freezing-limit particle dynamics.

mod args;
mod format;
mod manifest;
mod sde;
mod solve;
mod verify;
mod zeros;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Domain(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl From<cms_core::Error> for CliError {
    fn from(e: cms_core::Error) -> Self {
        if e.is_input() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Domain(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = match cli.command {
        Command::Solve(a) => solve::run(&a, &mut out),
        Command::Zeros(a) => zeros::run(&a, &mut out),
        Command::Verify(a) => verify::run(&a, &mut out),
        Command::Sde(a) => sde::run(&a, &mut out),
    };
    let flushed = out.flush();
    match result.and(flushed.map_err(CliError::from)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
