use thiserror::Error;

/// Errors raised by the library surface.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("label {label} outside [{lo}, {hi}]")]
    LabelOutOfRange { label: i64, lo: i64, hi: i64 },

    #[error(
        "minimizer for label {label} still on the window edge after {widenings} widenings (half-width {half_width})"
    )]
    WindowExhausted {
        label: i64,
        widenings: u32,
        half_width: u64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("brute-force oracle limited to {cap} points, got {got}")]
    OracleCap { cap: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
