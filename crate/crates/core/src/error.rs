use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed or inconsistent input data.
    #[error("invalid input: {0}")]
    Input(String),

    /// The operation is not available for this kind of valuation.
    #[error("unsupported: {0}")]
    Capability(String),

    /// Exhaustive enumeration would exceed the supported size.
    #[error("{what} supports at most {max} agents, got {n}")]
    TooLarge { what: &'static str, n: usize, max: usize },

    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn guard_size(what: &'static str, n: usize, max: usize) -> Result<()> {
    if n > max {
        Err(Error::TooLarge { what, n, max })
    } else {
        Ok(())
    }
}
