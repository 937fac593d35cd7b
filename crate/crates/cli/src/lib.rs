//! Command-line front end: synthetic data, training, segmentation,
//! evaluation and tuning.
//!
//! Exit codes: 0 success, 1 usage, 2 validation, 3 I/O.

pub mod commands;
pub mod error;
pub mod formats;
pub mod manifest;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use crate::commands::{execute, Cli};
use crate::error::{EXIT_OK, EXIT_USAGE};

/// Parses `args` (including the program name) and runs the command,
/// writing normal output to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    match execute(&cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
