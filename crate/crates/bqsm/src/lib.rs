//! Command-line front end for `bqsm-core`: artifact files, experiment
//! drivers and the `bqsm` binary's dispatch.

pub mod cli;
pub mod experiments;
pub mod formats;
pub mod mbp_file;

use std::fmt;

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for an internal or protocol error.
pub const EXIT_ERROR: i32 = 1;
/// Exit status when a check (MAC, signature, decryption, one-time
/// evaluation) rejects.
pub const EXIT_REJECT: i32 = 2;
/// Exit status for malformed command lines.
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug)]
pub enum CliError {
    Core(bqsm_core::Error),
    Io(std::io::Error),
    Json(serde_json::Error),
    Format(String),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io: {e}"),
            CliError::Json(e) => write!(f, "json: {e}"),
            CliError::Format(m) => write!(f, "format: {m}"),
            CliError::Usage(m) => write!(f, "usage: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<bqsm_core::Error> for CliError {
    fn from(e: bqsm_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_ERROR,
        }
    }
}
