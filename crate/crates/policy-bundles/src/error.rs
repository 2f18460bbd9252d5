use thiserror::Error;

/// Coarse failure category, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("line {line}: malformed date `{value}`")]
    MalformedDate { line: u64, value: String },

    #[error("line {line}: unknown jurisdiction `{value}`")]
    UnknownJurisdiction { line: u64, value: String },

    #[error("line {line}: effective date {effective} is after valid-through date {valid_through}")]
    InvertedInterval {
        line: u64,
        effective: chrono::NaiveDate,
        valid_through: chrono::NaiveDate,
    },

    #[error("line {line}: {message}")]
    MalformedRecord { line: u64, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("missing covariate row for state {state} year {year}")]
    MissingCovariate { state: String, year: i32 },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("model did not converge after {iterations} iterations; deviance trace: {trace:?}")]
    NonConvergence { iterations: usize, trace: Vec<f64> },
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) => ErrorCategory::Config,
            Error::Numerical(_) | Error::NonConvergence { .. } => ErrorCategory::Numerical,
            _ => ErrorCategory::Data,
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
