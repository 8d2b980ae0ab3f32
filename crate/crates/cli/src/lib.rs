//! Library side of the `biphoton` command-line tool: config parsing, the
//! subcommand bodies and the self-verification suite.

pub mod commands;
pub mod config;
pub mod verify;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] config::ConfigError),
    #[error("{0}")]
    Library(#[from] biphoton::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("verification failed: {0} check(s)")]
    VerifyFailed(usize),
}

impl CliError {
    /// 1 for bad input, 2 for a numerical failure, 3 for a failed verify run.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Library(e) if e.is_numerical() => 2,
            CliError::VerifyFailed(_) => 3,
            _ => 1,
        }
    }
}
