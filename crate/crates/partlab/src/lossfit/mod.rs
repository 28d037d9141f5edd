//! Weighted regression of relaxation rates against participation ratios.

use thiserror::Error;

/// Fit-stage failures.
#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("design '{0}' has no usable samples")]
    DegenerateDesign(String),

    #[error("sample '{0}' has a non-positive relaxation time or uncertainty")]
    ZeroRate(String),

    #[error("fit request outside the dataset: {0}")]
    OutOfRange(String),
}

impl FitError {
    pub fn exit_code(&self) -> i32 {
        match self {
            FitError::DegenerateDesign(_) => 4,
            FitError::ZeroRate(_) | FitError::OutOfRange(_) => 3,
        }
    }
}
