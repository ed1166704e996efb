use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument outside the physical or mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The motional state left the truncated Fock space.
    #[error("Fock truncation overflow: {0}")]
    TruncationOverflow(String),
    #[error("integration failed: {0}")]
    Integration(String),
    /// Data that cannot constrain the requested parameters.
    #[error("non-identifiable fit: {0}")]
    NonIdentifiable(String),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
