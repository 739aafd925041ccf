use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the requested function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed to meet its tolerance.
    #[error("numerical error in {what}: {detail}")]
    Numerical { what: &'static str, detail: String },

    /// A simulation ran out of its extension budget.
    #[error("resource exhausted in {what}: reached {attained} of {requested}")]
    Resource {
        what: &'static str,
        attained: f64,
        requested: f64,
    },

    /// The requested construction is not available for these parameters.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An internal consistency check failed.
    #[error("internal consistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
