use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An AR root lies on or inside the unit circle.
    #[error("model is not stationary: smallest AR root modulus {min_modulus} is not > 1")]
    NonStationary { min_modulus: f64 },

    /// An MA root lies on or inside the unit circle.
    #[error("model is not invertible: smallest MA root modulus {min_modulus} is not > 1")]
    NonInvertible { min_modulus: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("filter autocovariance has no geometric tail; truncation horizon cannot be certified")]
    TailUnknown,

    #[error("insufficient lags: need {needed}, have {available}")]
    InsufficientLags { needed: usize, available: usize },

    /// The sequence does not decay geometrically on its computed range.
    #[error("no geometric envelope: decay rate {rate} is indistinguishable from 1")]
    NoGeometricEnvelope { rate: f64 },

    #[error("lag range error: {0}")]
    Range(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
