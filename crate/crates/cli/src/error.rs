use thiserror::Error;

/// Failures grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config, script, lexicon or input files. Exit 2.
    #[error("{0}")]
    Config(String),
    /// The bundle could not be decoded, or decoded to a different tree. Exit 3.
    #[error("{0}")]
    Decode(String),
    /// The integrator refused the run. Exit 4.
    #[error("{0}")]
    Integration(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Decode(_) => 3,
            CliError::Integration(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Decode(_) => "decode",
            CliError::Integration(_) => "integration",
        }
    }

    /// `error[<kind>]: <message>` on one line.
    pub fn line(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("error[{}]: {}", self.kind(), msg)
    }
}

pub fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

pub fn io_err(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}
