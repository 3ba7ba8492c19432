use std::path::Path;

/// Failures mapped onto the process exit status.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Model(dcf_delay::Error),
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Model(e) if e.is_config() => 1,
            CliError::Model(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "invalid configuration: {msg}"),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl From<dcf_delay::Error> for CliError {
    fn from(e: dcf_delay::Error) -> Self {
        CliError::Model(e)
    }
}
