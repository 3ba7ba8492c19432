use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the delay model and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-defective distribution: P_Own = {0}, no positive transform root exists")]
    NonDefective(f64),

    #[error("root bracket failure: function never turned positive below {0}")]
    BracketFailure(f64),

    #[error("fixed point did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("delay durations were not derived from the supplied parameters")]
    DurationMismatch,

    #[error("empty sample set")]
    EmptySamples,

    #[error("evaluation grids differ: {0}")]
    GridMismatch(String),
}

impl Error {
    /// Errors that come from bad inputs rather than a numerical breakdown.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_) | Error::DurationMismatch | Error::GridMismatch(_)
        )
    }
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidConfig(msg.into()))
}
