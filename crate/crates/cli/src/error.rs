use thiserror::Error;

/// Failure of a subcommand, carrying the process exit code it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, a config that does not parse or validate, or inputs outside an operation's domain.
    #[error("{0}")]
    Usage(String),
    /// The command was well formed but failed while running.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Runtime(_) => 3,
        }
    }

    /// Classifies a core error raised while checking inputs.
    pub fn input(err: trustvote_core::Error) -> Self {
        Self::Usage(err.to_string())
    }

    /// Classifies a core error raised while running.
    pub fn run(err: trustvote_core::Error) -> Self {
        use trustvote_core::Error as E;
        match err {
            E::Config(_) | E::Stability { .. } | E::Domain(_) => Self::Usage(err.to_string()),
            other => Self::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Runtime(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Runtime(format!("csv error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Runtime(format!("json error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
