use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Read { path: PathBuf, source: io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },

    #[error("solver error: {0}")]
    Solver(#[from] spectra_core::Error),

    #[error("stats error: {0}")]
    Stats(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("{failed} of {total} sweep cells failed")]
    Sweep { failed: usize, total: usize, code: i32 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Read { .. } | CliError::MissingInput(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Stats(_) => 4,
            CliError::Write { .. } => 1,
            CliError::Sweep { code, .. } => *code,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::MissingInput("x".into()).exit_code(), 2);
        assert_eq!(CliError::Solver(spectra_core::Error::SingularTransition).exit_code(), 3);
        assert_eq!(CliError::Stats("x".into()).exit_code(), 4);
        let sweep = CliError::Sweep {
            failed: 1,
            total: 3,
            code: 3,
        };
        assert_eq!(sweep.exit_code(), 3);
    }
}
