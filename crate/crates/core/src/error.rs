use thiserror::Error;

/// Errors shared by every engine in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// An exact procedure was asked to run past its hard size bound.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    /// No subset of the allowed literals generates the requested target.
    #[error("no key within the allowed set generates the target")]
    NoKey,
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
