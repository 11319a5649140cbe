use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// Variants are grouped by how a caller is expected to react: precondition
/// failures (`Domain`, `Divergent`, `UnsupportedRegime`, `Precondition`,
/// `UnsupportedBasis`, `ZeroDenominator`), numerical failures
/// (`NonConvergence`, `NonFiniteSample`, `Overflow`) and cross-check failures
/// (`Consistency`).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("precondition violated: {}", .0.join("; "))]
    Precondition(Vec<String>),

    #[error("unsupported basis: {0}")]
    UnsupportedBasis(String),

    #[error("zero denominator: {0}")]
    ZeroDenominator(String),

    #[error("quadrature did not converge after level {level} (value {value:e}, err_est {err_est:e})")]
    NonConvergence {
        value: f64,
        err_est: f64,
        level: u32,
    },

    #[error("integrand returned a non-finite value at r = {at:e}")]
    NonFiniteSample { at: f64 },

    #[error("consistency check failed: {0}")]
    Consistency(String),
}

impl CoreError {
    /// True for errors caused by invalid inputs rather than numerical trouble.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            CoreError::Domain(_)
                | CoreError::Divergent(_)
                | CoreError::UnsupportedRegime(_)
                | CoreError::Precondition(_)
                | CoreError::UnsupportedBasis(_)
                | CoreError::ZeroDenominator(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
