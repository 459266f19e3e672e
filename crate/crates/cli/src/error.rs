use std::fmt;
use std::path::Path;

use fermicorr_core::Error;

/// A failed run, carrying the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unparseable or invalid configuration. Exit 2.
    Config(String),
    /// Missing input, unwritable output. Exit 3.
    Io(String),
    /// The detector grid cannot be sampled as a fermionic process. Exit 4.
    Sampling(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Sampling(_) => 4,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "invalid configuration: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
            CliError::Sampling(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match err {
            Error::SpectrumOutOfRange { .. } => CliError::Sampling(format!(
                "{err}; reduce eta*S*dt (detector efficiency, area or bin width)"
            )),
            Error::BinProbabilityTooLarge(_) | Error::DeflationBreakdown(_) => CliError::Sampling(err.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
