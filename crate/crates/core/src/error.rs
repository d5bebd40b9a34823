use thiserror::Error;

/// Errors raised by the simulation modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no energy-conserving partner: |q|^2 = {q_mag_sq} exceeds 4*detuning = {limit}")]
    ClosedChannel { q_mag_sq: f64, limit: f64 },

    #[error("{what} did not converge: change {change:e} exceeds tolerance {tolerance:e}")]
    NonConvergent {
        what: &'static str,
        change: f64,
        tolerance: f64,
    },

    #[error("form factor quadrature left an imaginary residual of {0:e}")]
    ImaginaryResidual(f64),

    #[error("gain scan is identically zero")]
    AllZeroScan,

    #[error("exponent {exponent} exceeds the overflow limit {limit}")]
    Overflow { exponent: f64, limit: f64 },

    #[error("atom number {0} is odd; the pair basis requires an even number")]
    OddAtomNumber(u64),

    #[error("evolution is not unitary: norm drift {drift:e} exceeds {budget:e}")]
    NonUnitary { drift: f64, budget: f64 },

    #[error("coefficients are not normalized: sum |a_m|^2 = {norm}")]
    NotNormalized { norm: f64 },

    #[error("coefficient data, line {line}: {reason}")]
    InvalidCoefficients { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
