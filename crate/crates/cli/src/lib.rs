//! End-to-end plate recognition pipeline: detect, crop, recognize, map
//! to Persian, plus the train / eval / predict / benchmark / synth
//! command implementations.

pub mod commands;
pub mod config;
pub mod persian;
pub mod pipeline;
pub mod report;

use thiserror::Error;

/// Command-level failures, classified by exit code: usage errors exit
/// 1, data errors 2, numeric failures 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("data: {0}")]
    Data(String),
    #[error("numeric: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}
