use thiserror::Error;

use crate::pde::IterationLog;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A geometric precondition failed (angle out of range, point outside the domain).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("assembly failed: {0}")]
    Assembly(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("degenerate pencil: eigenvalue {0} lies on the energy line")]
    DegeneratePencil(f64),

    #[error("unsupported: {0}")]
    Capability(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("fixed-point iteration did not converge after {} iterates", .0.iterates.len())]
    NonConvergence(Box<IterationLog>),

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::Parameter(_)
            | Error::Config { .. }
            | Error::Range(_)
            | Error::Capability(_) => 2,
            Error::NonConvergence(_) => 4,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
            _ => 3,
        }
    }
}
