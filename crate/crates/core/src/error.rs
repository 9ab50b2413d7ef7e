use thiserror::Error;

/// Errors raised by the palmshift library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("ax+b elements need a > 0, got a = {0}")]
    NonPositiveScale(f64),

    #[error("non-finite coordinate {0}")]
    NonFinite(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("window {0} is not valid for this model")]
    InvalidWindow(String),

    #[error("region has infinite Haar mass")]
    InfiniteMass,

    #[error("translated region leaves the representable family: {0}")]
    NotRepresentable(String),

    #[error("point is not in the configuration")]
    NotAPoint,

    #[error("configuration is not simple: points {0} and {1} coincide")]
    NotSimple(usize, usize),

    #[error("point {0} lies outside the window")]
    OutsideWindow(usize),

    #[error("configuration does not contain the identity")]
    MissingIdentity,

    #[error("point-shift is not bijective here: {0} preimages")]
    NotBijective(usize),

    #[error("evaluation censored by the window boundary")]
    Censored,

    #[error("transport kernel has unbounded support")]
    UnboundedSupport,

    #[error("network is disconnected")]
    Disconnected,

    #[error("network is not embeddable: cycle product deviates from the identity by {0:e}")]
    NotEmbeddable(f64),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
