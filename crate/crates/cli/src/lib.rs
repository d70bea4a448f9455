//! Command-line front end for medax: file formats and subcommands.

pub mod commands;
pub mod io;

use std::fmt;

/// Failure of a subcommand, carrying its process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// At least one verification check failed.
    Verification(String),
    /// An input could not be read or parsed.
    Parse(String),
    /// An output could not be written. Shares the parse exit code.
    Io(String),
    EmptySet,
    BadParameter(String),
    /// Any other pipeline failure.
    Pipeline(String),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_EMPTY: i32 = 3;
pub const EXIT_PARAM: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) | CliError::Pipeline(_) => EXIT_VERIFY,
            CliError::Parse(_) | CliError::Io(_) => EXIT_PARSE,
            CliError::EmptySet => EXIT_EMPTY,
            CliError::BadParameter(_) => EXIT_PARAM,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Verification(s) => write!(f, "verification failed: {s}"),
            CliError::Parse(s) => write!(f, "parse error: {s}"),
            CliError::Io(s) => write!(f, "i/o error: {s}"),
            CliError::EmptySet => f.write_str("the input set is empty"),
            CliError::BadParameter(s) => write!(f, "bad parameter: {s}"),
            CliError::Pipeline(s) => write!(f, "{s}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<medax::Error> for CliError {
    fn from(e: medax::Error) -> Self {
        use medax::Error as E;
        match e {
            E::EmptySet | E::NoInterior => CliError::EmptySet,
            E::InvalidGrid(_) | E::InvalidParameter(_) | E::Unsupported(_) => CliError::BadParameter(e.to_string()),
            _ => CliError::Pipeline(e.to_string()),
        }
    }
}
