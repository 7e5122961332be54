use thiserror::Error;

use crate::linalg::Basis;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |M - M^dagger| = {max_asymmetry:e}")]
    NotHermitian { max_asymmetry: f64 },

    #[error("matrix is not unitary: max |U^dagger U - I| = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("basis mismatch: expected {expected:?}, got {found:?}")]
    BasisMismatch { expected: Basis, found: Basis },

    #[error(
        "RK4 step {dt:e} us is below the minimum step after shrinking to satisfy dt*|H| <= 0.1 (|H| = {generator_norm:e} rad/us)"
    )]
    StepTooSmall { dt: f64, generator_norm: f64 },

    #[error("steady-state system is rank deficient (nullity {nullity}); supply an initial state to fix the conserved quantities")]
    RankDeficient { nullity: usize },

    #[error("no dissipation: at least one nonzero rate is needed for a unique steady state")]
    NoDissipation,

    #[error("normal matrix is singular along parameter `{parameter}`")]
    SingularNormalMatrix { parameter: String },

    #[error("need at least {needed} data points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("data is flat (range {range:e}); cannot derive initial guesses")]
    FlatData { range: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
