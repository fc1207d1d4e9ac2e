//! Command-line driver for the `dsmfuse` tool.
//!
//! Exit codes: 0 success, 1 processing failure, 2 unreadable or malformed input or
//! unwritable output, 3 inputs that do not share or overlap a grid, 4 bad flags or
//! configuration. Outputs are staged and renamed into place only when the whole
//! command succeeds.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use args::{Cli, Command};
use clap::error::ErrorKind;
use clap::Parser;
use error::{CliError, EXIT_CONFIG, EXIT_OK};
use std::ffi::OsString;

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Fuse(a) => commands::fuse(a),
        Command::Rank(a) => commands::rank(a),
        Command::Eval(a) => commands::eval(a),
        Command::Curve(a) => commands::curve(a),
        Command::Rpc { op } => commands::rpc(op),
        Command::Synth(a) => commands::synth(a),
    }
}

fn parse(argv: &[OsString]) -> Result<Cli, i32> {
    Cli::try_parse_from(argv).map_err(|e| {
        let _ = e.print();
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
            _ => EXIT_CONFIG,
        }
    })
}

/// Runs one invocation and returns its exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match config::merge(&argv) {
        Ok(Some(merged)) => merged,
        Ok(None) => argv,
        Err(e) => return report(e),
    };
    let cli = match parse(&argv) {
        Ok(cli) => cli,
        Err(code) => return code,
    };

    let result = match cli.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n as usize).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(CliError::Processing(format!("thread pool: {e}"))),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => report(e),
    }
}

fn report(e: CliError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}
