use std::fmt;

/// Failure of a command, tagged with its exit code class.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments; exit 2.
    Config(String),
    /// A solver or ensemble member failed; exit 3.
    Solver(String),
    /// A verification check failed or drifted; exit 4.
    Verification(String),
    /// Filesystem or serialization trouble; exit 1.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<bht_core::Error> for CliError {
    fn from(e: bht_core::Error) -> Self {
        use bht_core::Error as E;
        match e {
            E::Parameter(_) | E::LatticeMismatch { .. } | E::UnknownField(_) => {
                CliError::Config(e.to_string())
            }
            E::EmptyWindow { .. } => CliError::Config(format!(
                "{e}; set solver.kappa_bar explicitly to override the formula"
            )),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
