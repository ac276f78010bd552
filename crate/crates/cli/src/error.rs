use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure at {point}: {source}")]
    Numeric {
        point: String,
        #[source]
        source: fermilab::Error,
    },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("compare: {0}")]
    Compare(String),
}

impl CliError {
    pub fn numeric(point: impl Into<String>, source: fermilab::Error) -> Self {
        CliError::Numeric { point: point.into(), source }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Compare(_) => 2,
            CliError::Numeric { .. } => 3,
            CliError::Io { .. } => 1,
        }
    }
}
