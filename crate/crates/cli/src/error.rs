use std::fmt;
use std::process::ExitCode;

use wntags_service::ApiError;

#[derive(Debug)]
pub enum CliError {
    /// Bad input file, missing path or I/O failure.
    Input(String),
    /// Rejected by a domain rule; `code` matches the service error code.
    Domain { code: &'static str, message: String },
}

impl CliError {
    pub fn input(e: impl fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }

    /// Maps a module error through the service code table. Internal errors
    /// are I/O and count as input failures.
    pub fn domain(e: impl Into<ApiError>) -> Self {
        let api = e.into();
        if api.status.is_server_error() {
            CliError::Input(api.message)
        } else {
            CliError::Domain {
                code: api.code,
                message: api.message,
            }
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(2),
            CliError::Domain { .. } => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "error: {m}"),
            CliError::Domain { code, message } => write!(f, "error: {code}: {message}"),
        }
    }
}
