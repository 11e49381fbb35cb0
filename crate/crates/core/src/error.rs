use thiserror::Error;

use crate::network::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("network violates {} invariant(s): {}", .0.len(), join_violations(.0))]
    Invalid(Vec<Violation>),

    /// Singular or ill-conditioned linear algebra.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A computation would exceed a configured size cap.
    #[error("resource limit: {0}")]
    Resource(String),

    #[error("gadget certification failed: {0}")]
    Gadget(Box<crate::reduction::CertificationFailure>),

    #[error("remote sampler: {0}")]
    Remote(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

impl Error {
    pub fn with_context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Parse { .. } | Error::Invalid(_) | Error::Io(_) => 2,
            Error::Numeric(_) | Error::Gadget(_) => 3,
            Error::Resource(_) => 4,
            Error::Remote(_) => 5,
            Error::Context { source, .. } => source.exit_code(),
        }
    }
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
