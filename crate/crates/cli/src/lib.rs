//! `crashsim` command-line front end: file formats and command drivers.

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod formats;

pub use commands::{run, Cli, Command, GlobalOpts, Outputs};
pub use error::{CliError, Result};

/// Environment variable capping the width of parallel sweeps.
pub const MAX_THREADS_ENV: &str = "CRASHSIM_MAX_THREADS";

/// Thread cap from `CRASHSIM_MAX_THREADS`, if set to a positive integer.
pub fn max_threads_from_env() -> Result<Option<usize>> {
    match std::env::var(MAX_THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "{MAX_THREADS_ENV} must be a positive integer, got '{v}'"
            ))),
        },
    }
}
