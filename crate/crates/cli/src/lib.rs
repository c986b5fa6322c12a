//! Driver for the verification suites: configuration, suite execution and
//! report emission. The `verify` binary is a thin wrapper around this crate.

pub mod config;
pub mod output;
pub mod suites;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{Format, Suite, SuiteConfig};
pub use output::{emit_report, ReportDocument, SCHEMA_VERSION};
pub use suites::run_suite;

/// Environment variable fixing the worker thread count.
pub const THREADS_ENV: &str = "OPENBOOK_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at line {line}, column {column}: {message}")]
    Config { line: usize, column: usize, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("{0}: {1}")]
    Io(PathBuf, String),
    #[error("{THREADS_ENV}: {0}")]
    Threads(String),
}

/// Size the global worker pool from `OPENBOOK_THREADS` if set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = value.trim().parse().map_err(|_| CliError::Threads(format!("not a count: {value:?}")))?;
    if n == 0 {
        return Err(CliError::Threads("must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Threads(e.to_string()))
}
