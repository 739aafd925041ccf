//! `hetdiff` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod density;
mod manifest;
mod regime;
mod simulate;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Failure modes mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl From<hetdiff::Error> for CliError {
    fn from(e: hetdiff::Error) -> Self {
        use hetdiff::Error::*;
        match e {
            Domain(_) | Unsupported(_) => CliError::Usage(e.to_string()),
            Numerical { .. } | Resource { .. } | Internal(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Exit status of a command that ran to completion.
pub enum Status {
    Ok,
    VerificationFailed,
}

fn dispatch(cli: Cli) -> CliResult<Status> {
    let threads = cli.threads;
    match cli.command {
        Command::Regime(a) => regime::run(&a).map(|_| Status::Ok),
        Command::Simulate(a) => simulate::run(&a, threads).map(|_| Status::Ok),
        Command::Density(a) => density::run(&a).map(|_| Status::Ok),
        Command::Verify(a) => verify::run(&a, threads),
        Command::Replay(a) => manifest::replay(&a.manifest, threads),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::VerificationFailed) => ExitCode::from(1),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(CliError::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
