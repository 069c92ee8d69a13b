use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the platoon library.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value broke one of its invariants.
    #[error("invalid value for `{field}`: {rule} (got {value})")]
    Invalid {
        field: String,
        rule: &'static str,
        value: String,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("empty series")]
    EmptySeries,

    #[error("scenario mismatch: `{0}` vs `{1}`")]
    ScenarioMismatch(String, String),

    #[error("malformed trace: {0}")]
    MalformedTrace(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    /// The episode produced a non-finite state. `trace` ends at the last
    /// finite control step.
    #[error("episode aborted at t={time}s: robot {robot} state became non-finite")]
    Aborted {
        time: f64,
        robot: usize,
        trace: Box<crate::trace::Trace>,
    },

    #[error("config: {0}")]
    Config(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, rule: &'static str, value: impl ToString) -> Self {
        Error::Invalid {
            field: field.into(),
            rule,
            value: value.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Checks `value > 0` and names the field on failure.
pub(crate) fn ensure_positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, "must be finite and > 0", value))
    }
}

pub(crate) fn ensure_non_negative(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, "must be finite and >= 0", value))
    }
}
