//! Command-line front end: forecasting, tuning, density fitting and
//! synthetic data generation over `digitcast-core`.

pub mod args;
pub mod backend;
pub mod cmd;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;

use std::ffi::OsString;

use clap::Parser;
use serde_json::json;

use crate::args::{Cli, Command};
pub use crate::error::{CliError, Result};

/// Runs one parsed command.
pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Forecast(a) => cmd::forecast::run(a),
        Command::Tune(a) => cmd::tune::run(a),
        Command::Densityfit(a) => cmd::densityfit::run(a),
        Command::Synth(a) => cmd::synth::run(a),
    }
}

/// One JSON line describing a failure, for stderr.
pub fn error_line(category: &str, message: &str) -> String {
    json!({ "error": category, "message": message }).to_string()
}

/// Parses `argv`, runs the command and returns the process exit code:
/// 0 on success, 1 on runtime errors, 2 on usage errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                print!("{e}");
            } else {
                eprint!("{e}");
                eprintln!("{}", error_line("usage", &e.kind().to_string()));
            }
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_line(e.category(), &e.to_string()));
            e.exit_code()
        }
    }
}
