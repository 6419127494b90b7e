//! Command-line front end. Exit codes: 0 success, 1 runtime failure (or a
//! failed selftest), 2 usage error.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Usage};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
