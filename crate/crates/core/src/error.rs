use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("profile `{which}` does not decay on the box: |value| = {value:e} at the edge, limit {limit:e}")]
    DecayViolation { which: String, value: f64, limit: f64 },

    #[error("box half-length {available} is too small: {reason}")]
    BoxTooSmall { available: f64, reason: String },

    #[error("non-finite state at t = {time}")]
    NonFiniteState { time: f64 },

    #[error("solvability identity broken: residual {residual:e} exceeds {threshold:e}")]
    SolvabilityBroken { residual: f64, threshold: f64 },

    #[error("order-two solvability residual {residual:e} exceeds {threshold:e}")]
    DerivationMismatch { residual: f64, threshold: f64 },

    #[error("need at least 3 snapshots for time differencing, got {got}")]
    InsufficientSnapshots { got: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("stretched coordinate {zeta} lies outside the decayed part of the box (half-length {half_length})")]
    OutOfBox { zeta: f64, half_length: f64 },

    #[error("no snapshot at t = {0}")]
    MissingSnapshot(f64),
}

impl Error {
    pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad inputs rather than by a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::DecayViolation { .. }
                | Error::BoxTooSmall { .. }
                | Error::GridMismatch(_)
        )
    }
}
