//! `nodegen` command-line tool.

mod commands;
mod embed_spec;

use std::process::ExitCode;

use clap::Parser;

use commands::{Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nodegen: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl CliError {
    /// 2: input or format, 3: numerical failure, 4: precondition.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) | CliError::Input(_) => 2,
            CliError::Lib(e) if e.is_format() => 2,
            CliError::Lib(e) if e.is_numerical() => 3,
            CliError::Lib(_) => 4,
        }
    }
}
