use alloc::string::String;

/// Failure modes shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of a law or an algorithm.
    #[error("domain error: {0}")]
    Domain(String),
    /// A configuration is inconsistent (bad step sizes, empty grids, ...).
    #[error("configuration error: {0}")]
    Config(String),
    /// A step, sample or rejection budget was exhausted.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// A generated object failed a structural check.
    #[error("structural check failed: {0}")]
    Structural(String),
    /// A statistic cannot be computed from the available data.
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $kind:ident, $($fmt:tt)+) => {
        if !($cond) {
            return Err($crate::error::Error::$kind(alloc::format!($($fmt)+)));
        }
    };
}
pub(crate) use ensure;
