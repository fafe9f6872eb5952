//! File formats, parallel scheduling and the command-line front end for
//! `lundberg-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod input;
pub mod output;
pub mod runner;

use std::ffi::OsString;

use clap::Parser;

pub use commands::run;
pub use config::{Cli, Command, RunConfig, DEFAULT_SEED};
pub use error::CliError;
pub use output::{Format, Output};
pub use runner::RayonRunner;

/// What a process invocation would print and return.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (program name first), runs the command and renders its
/// output.
pub fn run_cli<I, T>(args: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            return Invocation { code: 0, stdout: e.render().to_string(), stderr: String::new() };
        }
        Err(e) => {
            let first = e.render().to_string().lines().next().unwrap_or_default().trim_start_matches("error: ").to_owned();
            let err = CliError::Usage(first);
            return Invocation { code: err.exit_code(), stdout: String::new(), stderr: err.diagnostic() + "\n" };
        }
    };
    let config = RunConfig::from(cli);
    match run(&config) {
        Ok(out) => Invocation { code: 0, stdout: out.emit(config.format), stderr: String::new() },
        Err(err) => Invocation { code: err.exit_code(), stdout: String::new(), stderr: err.diagnostic() + "\n" },
    }
}
