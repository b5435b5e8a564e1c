use thiserror::Error;

pub type Result<T> = std::result::Result<T, PdsError>;

/// Failure modes of the estimation pipeline.
///
/// The variants are grouped by the CLI into configuration problems,
/// numerical failures and violated modelling assumptions (see [`PdsError::class`]).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdsError {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("quadrature did not converge after {intervals} subintervals (estimated error {error:e})")]
    NonConverged { intervals: usize, error: f64 },

    #[error("fixed point did not converge after {iterations} iterations (residual {residual:e})")]
    FixedPointNonConverged { iterations: usize, residual: f64 },

    #[error("spectral support not bracketed: boundary density {boundary:e} exceeds {limit:e}")]
    SupportNotBracketed { boundary: f64, limit: f64 },

    #[error("singular transfer function at omega = {omega}")]
    SingularTransfer { omega: f64 },

    #[error("negative variance encountered ({0:e})")]
    NegativeVariance(f64),

    #[error("response did not decay below the threshold before t = {cap}")]
    NoDecay { cap: f64 },

    #[error("rare-event probability {0} is not in (0, 1); impulses are not rare for this forcing")]
    PrOutOfRange(f64),

    #[error("response is not oscillatory: only {peaks} envelope peaks found")]
    NotOscillatory { peaks: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("integrator failure at t = {t}: {reason}")]
    IntegratorFailure { t: f64, reason: String },

    #[error("every cell of the design grid failed")]
    AllCellsFailed,
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numerical,
    Assumption,
}

impl PdsError {
    pub fn class(&self) -> ErrorClass {
        match self {
            PdsError::InvalidModel(_) | PdsError::GridMismatch(_) => ErrorClass::Config,
            PdsError::PrOutOfRange(_) | PdsError::NotOscillatory { .. } => ErrorClass::Assumption,
            _ => ErrorClass::Numerical,
        }
    }
}
