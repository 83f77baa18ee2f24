use alloc::string::String;

/// Errors raised by the algorithmic core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter or combination of parameters is outside its valid range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A sampling neighbourhood would read outside the data.
    #[error("border violation along {axis}: {detail}")]
    Border { axis: &'static str, detail: String },

    /// Input shapes disagree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A clip cannot be conditioned (too short, wrong layout, ...).
    #[error("preprocessing failed: {0}")]
    Preprocess(String),

    /// Training data has no usable variance.
    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// An evaluation protocol cannot be run on the given data.
    #[error("protocol error: {0}")]
    Protocol(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! config_err {
    ($($arg:tt)*) => { $crate::error::Error::Config(alloc::format!($($arg)*)) };
}
pub(crate) use config_err;
