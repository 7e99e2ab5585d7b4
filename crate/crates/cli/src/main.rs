//! `sos-staircase`: reproduce the value table, the threshold staircase,
//! projection supports, certificate files and the threshold bounds.

mod args;
mod bounds;
mod certify;
mod output;
mod pool;
mod project;
mod staircase;
mod table;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Some cells or orders failed and were reported as NA.
    Partial,
    VerificationFailed,
    Config,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Partial => 2,
            Status::VerificationFailed => 3,
            Status::Config => 4,
        }
    }
}

/// Configuration problems detected after argument parsing.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(Status::Config.code()),
            };
        }
    };
    let result = match cli.command {
        Command::Table(a) => table::run(&a),
        Command::Staircase(a) => staircase::run(&a),
        Command::Project(a) => project::run(&a),
        Command::Certify(a) => certify::run(&a),
        Command::Bounds(a) => bounds::run(&a),
    };
    let status = result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        Status::Config
    });
    ExitCode::from(status.code())
}
