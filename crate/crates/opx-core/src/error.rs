use alloc::string::String;

/// Failures surfaced by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OpxError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("insufficient data: need {needed}, have {available}")]
    Insufficient { needed: usize, available: usize },
    #[error("moment of order {order} diverges")]
    DivergentMoment { order: usize },
    #[error("quadrature did not converge (achieved error {achieved:e})")]
    QuadratureFailure { achieved: f64 },
    #[error("Hankel determinant D_{index} vanishes at working precision")]
    VanishingHankel { index: usize },
    #[error("singular system at multi-index {0}")]
    Singular(String),
    #[error("no convergence after {iterations} iterations (last change {last_change:e})")]
    NoConvergence { iterations: usize, last_change: f64 },
    #[error("nonpositive iterate at n = {index}")]
    Nonpositive { index: usize },
    #[error("precision exhausted beyond index {last_good}")]
    PrecisionExhausted { last_good: usize },
    #[error("point {x} lies outside the weight domain")]
    OutsideDomain { x: f64 },
    #[error("division by zero at step {step}")]
    DivisionByZero { step: usize },
    #[error("finite-difference stencil crosses a pole near t = {t}")]
    Pole { t: f64 },
    #[error("no prediction registered for {0}")]
    NoPrediction(String),
}

impl OpxError {
    /// Whether the failure is a caller mistake rather than a numerical one.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            OpxError::InvalidParameter(_) | OpxError::Insufficient { .. } | OpxError::OutsideDomain { .. }
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            OpxError::InvalidParameter(_) => "invalid_parameter",
            OpxError::Insufficient { .. } => "insufficient_data",
            OpxError::DivergentMoment { .. } => "divergent_moment",
            OpxError::QuadratureFailure { .. } => "quadrature_failure",
            OpxError::VanishingHankel { .. } => "vanishing_hankel",
            OpxError::Singular(_) => "singular_system",
            OpxError::NoConvergence { .. } => "no_convergence",
            OpxError::Nonpositive { .. } => "nonpositive_iterate",
            OpxError::PrecisionExhausted { .. } => "precision_exhausted",
            OpxError::OutsideDomain { .. } => "outside_domain",
            OpxError::DivisionByZero { .. } => "division_by_zero",
            OpxError::Pole { .. } => "pole",
            OpxError::NoPrediction(_) => "no_prediction",
        }
    }
}

pub type Result<T> = core::result::Result<T, OpxError>;

pub(crate) fn invalid(msg: impl Into<String>) -> OpxError {
    OpxError::InvalidParameter(msg.into())
}
