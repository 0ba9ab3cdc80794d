use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("non-finite value {value} in {what}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("bandwidth must be positive and finite, got {0}")]
    InvalidBandwidth(f64),

    #[error("{what}: expected length {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("design matrix (with intercept) is rank deficient")]
    SingularDesign,

    #[error("estimated slope vector is zero; the index direction is undefined")]
    DegenerateDirection,

    #[error("index {index} out of range for {len} observations")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(
        "variance estimate is zero; the weight may be a function of the index \
         or the residuals vanish"
    )]
    DegenerateVariance,

    #[error(
        "covariance matrix is near singular (condition number {condition:e}); \
         weights {first} and {second} look linearly dependent"
    )]
    NearSingularCovariance {
        condition: f64,
        first: usize,
        second: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("weight `{0}` is complex valued and cannot be used as a real score weight")]
    ComplexWeight(String),
}
