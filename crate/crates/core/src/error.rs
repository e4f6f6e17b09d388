use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value while evaluating {what}")]
    NonFinite { what: String },

    #[error("singular {dim}x{dim} matrix (condition estimate {condition:e})")]
    Singular { dim: usize, condition: f64 },

    #[error("{quantity} = {value} is outside the admissible domain {domain}")]
    Domain {
        quantity: &'static str,
        value: f64,
        domain: String,
    },

    #[error("inconsistent input: {0}")]
    Consistency(String),

    #[error("degenerate mass matrix: E = {e:e} must exceed {min:e}")]
    Degenerate { e: f64, min: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integration produced a non-finite state; last valid sample is #{last_valid}")]
    Diverged { last_valid: usize },
}
