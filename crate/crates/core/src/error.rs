use thiserror::Error;

/// Errors raised by structure loading and the spectral solvers.
#[derive(Debug, Error)]
pub enum TrussError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid {entity} '{id}': {reason}")]
    Validation {
        entity: &'static str,
        id: String,
        reason: String,
    },

    #[error("rod '{rod}' is within the pole guard of omega*tau = {n}*pi")]
    PoleProximity { rod: String, n: i64 },

    #[error("network Laplacian is singular at omega = {omega} (reciprocal condition {rcond:e})")]
    SingularAtFrequency { omega: f64, rcond: f64 },

    #[error("omega = {omega} is not a natural frequency (smallest relative singular value {ratio:e})")]
    NotARoot { omega: f64, ratio: f64 },

    #[error("rods at joint '{joint}' do not span the coordinate space")]
    DegenerateJoint { joint: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("live wavefront count {live} exceeded the cap of {cap}; raise min_amplitude")]
    EventExplosion { live: usize, cap: usize },

    #[error("invalid frequency window: {0}")]
    InvalidWindow(String),

    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },
}

impl TrussError {
    pub(crate) fn validation(entity: &'static str, id: impl Into<String>, reason: impl Into<String>) -> Self {
        TrussError::Validation {
            entity,
            id: id.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input documents rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            TrussError::Parse(_)
                | TrussError::Validation { .. }
                | TrussError::Unknown { .. }
                | TrussError::InvalidWindow(_)
                | TrussError::DimensionMismatch { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, TrussError>;
