//! Library surface of the pipeline driver, shared by the `vqs` binary and the
//! acceptance suite.

pub mod config;
pub mod report;
pub mod stages;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    MissingArtifact(String),
    Numerical(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::MissingArtifact(m) => write!(f, "missing artifact: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<vqs_core::Error> for CliError {
    fn from(e: vqs_core::Error) -> Self {
        use vqs_core::Error as E;
        match e {
            E::BadConfig(m) => CliError::Config(m),
            E::Io(io) => CliError::Io(io),
            E::CorruptFile(m) => CliError::MissingArtifact(format!("unreadable artifact: {m}")),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::MissingArtifact(_) => 3,
            CliError::Numerical(_) | CliError::Io(_) => 4,
        }
    }
}
