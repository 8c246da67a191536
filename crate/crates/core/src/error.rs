use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument or input object violates an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),
    /// An iterative routine failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// The input has no nontrivial structure to report on, e.g. every
    /// eigenvalue falls in the numerical kernel.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// An index set would exceed the configured size cap.
    #[error("size error: {requested} indices exceed the cap of {cap}")]
    Size { requested: usize, cap: usize },
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
