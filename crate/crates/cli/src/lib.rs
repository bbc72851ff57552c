//! Experiment runner for the `ris-mimo` library.
//!
//! Every experiment returns a [`output::Table`]; the binary renders it as CSV
//! behind a reproducibility stamp. Sweep points are evaluated in parallel and
//! collected in sweep order, so the output does not depend on the thread count.

pub mod experiments;
pub mod output;
pub mod settings;
pub mod validate;

/// Everything the runner can fail with.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] ris_mimo::Error),
    #[error("configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("invalid sweep: {0}")]
    Sweep(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
