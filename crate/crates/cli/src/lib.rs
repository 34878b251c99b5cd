//! Command implementations behind the `qcap` binary, with the report types
//! they emit.

pub mod args;
pub mod commands;
pub mod reports;
pub mod verify;

use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub enum CliError {
    Core(qcap_core::error::Error),
    Io(String),
    Invalid(String),
    /// A property check failed; the report has already been written.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Failed(_) => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) | CliError::Invalid(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<qcap_core::error::Error> for CliError {
    fn from(e: qcap_core::error::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Writes `text` to `out`, or to standard output.
pub fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}
