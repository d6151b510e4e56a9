use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval ({lower}, {upper})")]
    InvalidInterval { lower: f64, upper: f64 },

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular point at t = {0}")]
    SingularPoint(f64),

    #[error("power with exponent {exponent} is singular at interior point {center}")]
    InteriorSingularity { center: f64, exponent: f64 },

    #[error("divergent integral: |f|^{order} is not integrable at t = {at}")]
    DivergentIntegral { at: f64, order: f64 },

    #[error("tolerance not met after {panels} panels (value {value}, error {error})")]
    ToleranceNotMet { value: f64, error: f64, panels: usize },

    #[error("unbounded integrand near t = {0}")]
    UnboundedIntegrand(f64),

    #[error("divergent pairing: |fg| is not integrable at t = {0}")]
    DivergentPairing(f64),

    #[error("invalid decomposition: parts differ from the target by {0} at a sample point")]
    InvalidDecomposition(f64),
}
