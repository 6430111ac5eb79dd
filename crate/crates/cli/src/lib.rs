//! Library half of the `thz-tomo` binary: dataset files, commands and the
//! exit-code mapping.

pub mod args;
mod commands;
pub mod dataset;
pub mod error;
pub mod pgm;
pub mod verify;

use std::ffi::OsString;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

/// Environment variable fixing the worker thread count.
pub const THREADS_ENV: &str = "THZ_TOMO_THREADS";

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a thread count, got {raw:?}")))?;
    // a pool built earlier in this process wins
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    // everything after the subcommand name, for provenance
    let argv: Vec<String> = args
        .iter()
        .skip(2)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let result = init_threads().and_then(|()| match &cli.command {
        Command::Phantom(a) => commands::phantom(a, &argv),
        Command::Simulate(a) => commands::simulate(a, &argv),
        Command::Preprocess(a) => commands::preprocess_cmd(a, &argv),
        Command::Reconstruct(a) => commands::reconstruct(a, &argv),
        Command::Verify(a) => commands::verify(a),
        Command::Info(a) => commands::info_cmd(a),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
