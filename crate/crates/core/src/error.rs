use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdhmError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("{0} is singular")]
    Singular(&'static str),
    #[error("invalid tolerance: {0}")]
    Tolerance(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid data: {0}")]
    Invalid(String),
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    #[error("binary form is identically zero")]
    ZeroForm,
    #[error("random generation failed: {0}")]
    Generation(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("numerical routine failed: {0}")]
    Numerical(&'static str),
}

pub type Result<T, E = AdhmError> = std::result::Result<T, E>;
