use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Every variant has a stable machine-readable [`Error::code`], which the
/// command-line reports serialize.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("quadrature did not converge after {panels} panels (estimated error {achieved:e}, target {target:e})")]
    NonConvergence {
        panels: usize,
        achieved: f64,
        target: f64,
    },
    #[error("decay bound cannot reach the tolerance: {0}")]
    InvalidDecayBound(String),
    #[error("derivative order {order} unsupported (maximum {max})")]
    UnsupportedDerivativeOrder { order: usize, max: usize },
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("precision loss at {at}: margin {margin:e} does not exceed error bound {bound:e}")]
    PrecisionLoss { at: f64, margin: f64, bound: f64 },
    #[error("domain violation at {at}: {detail}")]
    DomainViolation { at: f64, detail: String },
    #[error("tail dominated: {0}")]
    TailDominated(String),
    #[error("hypothesis unverified: {0}")]
    HypothesisUnverified(String),
    #[error("evaluation point {x} coincides with a real zero")]
    PoleAtZero { x: f64 },
    #[error("series diverges: {0}")]
    SeriesDivergence(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonConvergence { .. } => "non_convergence",
            Error::InvalidDecayBound(_) => "invalid_decay_bound",
            Error::UnsupportedDerivativeOrder { .. } => "unsupported_derivative_order",
            Error::PrecisionExhausted(_) => "precision_exhausted",
            Error::PrecisionLoss { .. } => "precision_loss",
            Error::DomainViolation { .. } => "domain_violation",
            Error::TailDominated(_) => "tail_dominated",
            Error::HypothesisUnverified(_) => "hypothesis_unverified",
            Error::PoleAtZero { .. } => "pole_at_zero",
            Error::SeriesDivergence(_) => "series_divergence",
            Error::NonFinite(_) => "non_finite",
            Error::InvalidInput(_) => "invalid_input",
        }
    }

    /// True for failures caused by insufficient working precision rather than
    /// by bad input.
    pub fn is_precision_failure(&self) -> bool {
        matches!(
            self,
            Error::PrecisionExhausted(_) | Error::PrecisionLoss { .. } | Error::NonConvergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
