use thiserror::Error;

/// Failures surfaced by the command-line tool, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or unusable input (exit code 2).
    #[error("{0}")]
    Input(String),

    /// A computation that could not complete (exit code 1).
    #[error("{0}")]
    Compute(String),

    /// Input that could not be read (exit code 2).
    #[error("{path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Output that could not be written (exit code 1).
    #[error("{path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Read { .. } => 2,
            CliError::Compute(_) | CliError::Write { .. } => 1,
        }
    }

    pub fn read(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Read {
            path: path.into(),
            source,
        }
    }

    pub fn write(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Write {
            path: path.into(),
            source,
        }
    }
}

impl From<benford_ecp::Error> for CliError {
    fn from(e: benford_ecp::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Compute(e.to_string())
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
