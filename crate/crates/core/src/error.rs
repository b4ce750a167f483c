use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("invalid Berger parameters s={s}, t={t}: expected 1 <= s <= t")]
    InvalidBergerParams { s: f64, t: f64 },

    #[error("structure constants: {0}")]
    InvalidFrame(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("chart consistency: coordinate tangent leaves the frame span (residual {residual:.3e})")]
    ChartConsistency { residual: f64 },

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize, usize),
        actual: (usize, usize, usize),
    },

    #[error("zero volume")]
    ZeroVolume,

    #[error("degenerate trial function: L^p norm {norm:.3e} below threshold")]
    DegenerateTrial { norm: f64 },

    #[error("numerical failure: {message}")]
    NumericalFailure { message: String, trace: Vec<f64> },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("bisection bracket [{lo}, {hi}] contains no sign change")]
    Bracket { lo: f64, hi: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors caused by bad caller input rather than a numerical breakdown.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::NumericalFailure { .. } | Error::Internal(_) | Error::ChartConsistency { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
