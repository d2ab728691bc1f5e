//! `measmap` command-line tool.
//!
//! Exit status: 0 on success or a satisfied certificate, 1 on a finding
//! (violated certificate, failed reconstruction; the report is still
//! written), 2 on usage or input errors.

mod args;
mod commands;
mod io;

use std::process::ExitCode;

use clap::Parser;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("input: {0}")]
    Input(String),
}

/// Whether the command's finding is clean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    Finding,
}

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match commands::run(cli.command) {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::Finding) => ExitCode::from(1),
        Err(e) => {
            eprintln!("measmap: {e}");
            ExitCode::from(2)
        }
    }
}
