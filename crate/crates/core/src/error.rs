use thiserror::Error;

/// Errors raised by depth construction, projection and solving.
#[derive(Debug, Clone, Error)]
pub enum DepthError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("infeasible constraint: {0}")]
    Infeasible(String),

    #[error("degenerate projection: {0}")]
    Degenerate(String),

    #[error("{family} is not differentiable at t = {t}")]
    NonDifferentiable { family: &'static str, t: f64 },

    #[error("solver stalled: {0}")]
    Stall(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("all {attempted} starts failed; first error: {first}")]
    AllStartsFailed {
        attempted: usize,
        first: Box<DepthError>,
    },
}

pub type Result<T> = std::result::Result<T, DepthError>;

impl DepthError {
    /// True for errors caused by the caller's data rather than the solver.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            DepthError::Dimension(_)
                | DepthError::Validation(_)
                | DepthError::Infeasible(_)
                | DepthError::Unsupported(_)
        )
    }
}

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(DepthError::Dimension(msg.into()))
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(DepthError::Validation(msg.into()))
}
