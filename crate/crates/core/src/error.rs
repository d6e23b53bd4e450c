use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An input outside the domain of the operation (mismatched algebras,
    /// wrong point kind, non-AOB basis, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// Non-finite values or a singular linear system.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A legal request beyond what is implemented (truncation too high, order cap, ...).
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A malformed integration scheme.
    #[error("scheme error: {0}")]
    Scheme(String),
    /// A point outside the domain of a local chart.
    #[error("chart error: {0}")]
    Chart(String),
    /// An implicit solve that did not reach its tolerance.
    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    Solver { iterations: usize, residual: f64 },
    /// A vanishing gradient or other degenerate configuration.
    #[error("degenerate configuration: {0}")]
    Degeneracy(String),
    /// Unknown name in a registry.
    #[error("unknown {kind} `{name}`")]
    Lookup { kind: &'static str, name: String },
    /// Malformed configuration or command line input.
    #[error("usage: {0}")]
    Usage(String),
    /// Failure inside a time-stepping loop.
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub(crate) fn scheme(msg: impl Into<String>) -> Self {
        Error::Scheme(msg.into())
    }

    pub(crate) fn chart(msg: impl Into<String>) -> Self {
        Error::Chart(msg.into())
    }

    /// The innermost error, with step annotations removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for failures caused by the numerics rather than by the request.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::Numeric(_) | Error::Chart(_) | Error::Solver { .. } | Error::Degeneracy(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
