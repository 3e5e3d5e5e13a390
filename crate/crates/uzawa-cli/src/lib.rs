//! Command-line harness for the saddle-point solver library: generate
//! problems, run solver/preconditioner matrices with residual traces,
//! evaluate spectral diagnostics, and drive the Navier-Stokes experiments.

pub mod commands;
pub mod config;
pub mod presets;

use std::fmt;

/// Errors classified by exit code: configuration (1), solver breakdown (2),
/// I/O (3).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    /// Classify a library error raised while interpreting configuration.
    pub fn config(e: uzawa::Error) -> Self {
        match e {
            uzawa::Error::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }

    /// Classify a library error raised while running a solver.
    pub fn solver(e: uzawa::Error) -> Self {
        match e {
            uzawa::Error::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Solver(other.to_string()),
        }
    }

    pub fn io(e: uzawa::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Solver(m) => write!(f, "solver error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
