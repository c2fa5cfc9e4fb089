use std::path::PathBuf;

use thiserror::Error;

use crate::grid::Domain;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("under-resolved envelope: {0}")]
    Resolution(String),

    #[error("coverage violation: {0}")]
    Coverage(String),

    #[error("value out of covered range: {0}")]
    Range(String),

    #[error("outside the valid domain: {0}")]
    OutOfDomain(String),

    #[error("expected a {expected} amplitude, got a {found} amplitude")]
    DomainTag { expected: Domain, found: Domain },

    #[error("degenerate walk-off: |beta1_s - beta1_i| = {difference:e} s/m <= {threshold:e} s/m")]
    DegenerateWalkoff { difference: f64, threshold: f64 },

    #[error("joint amplitude has zero norm")]
    DegenerateState,

    #[error("filter window transmits nothing")]
    DegenerateTransmission,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Io { .. } => 4,
            _ => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
