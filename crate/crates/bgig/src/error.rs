use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("multiple roots: {0}")]
    MultipleRoots(String),
    #[error("sampling failure: {0}")]
    Sampling(String),
    #[error("tabulation failure: {0}")]
    Tabulation(String),
    #[error("degenerate sample: {0}")]
    Degenerate(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
}

impl Error {
    /// True for failures of an iterative numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Convergence(_)
                | Error::NoRoot(_)
                | Error::MultipleRoots(_)
                | Error::Sampling(_)
                | Error::Tabulation(_)
                | Error::Overflow(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
