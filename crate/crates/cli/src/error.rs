use std::fmt;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or input files.
    Config(String),
    /// A check missed its tolerance or a solver gave up.
    Tolerance(String),
    /// The Muskat stepper detected growth of `‖f‖_∞`.
    Stability(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Tolerance(_) => 2,
            CliError::Stability(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Tolerance(m) => write!(f, "check failed: {m}"),
            CliError::Stability(m) => write!(f, "stability violation: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl From<dnlab::Error> for CliError {
    fn from(e: dnlab::Error) -> Self {
        use dnlab::Error as E;
        match e {
            E::StabilityViolation { .. } => CliError::Stability(e.to_string()),
            E::NoConvergence { .. } => CliError::Tolerance(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
