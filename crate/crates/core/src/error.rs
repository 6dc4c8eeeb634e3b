use thiserror::Error;

/// Errors raised by kernel evaluation, Gram factorization and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {value} lies outside the kernel domain {domain}")]
    Domain { value: f64, domain: String },

    #[error("invalid kernel parameters: {0}")]
    InvalidKernel(String),

    #[error("kernel {0} has no closed-form cardinal functions")]
    UnsupportedKernel(String),

    #[error("kernel {kernel} cannot be used for fitting: {reason}")]
    UnfittableKernel { kernel: String, reason: String },

    #[error("point set is empty")]
    EmptyPointSet,

    #[error("point set contains a non-finite value")]
    NonFinitePoint,

    #[error("point set is not pairwise distinct (minimum spacing {min_spacing:e})")]
    DuplicatePoints { min_spacing: f64 },

    #[error(
        "Gram matrix is numerically singular (rcond estimate {rcond:e}, minimum point spacing {min_spacing:e})"
    )]
    SingularGram { rcond: f64, min_spacing: f64 },

    #[error("shifted Gram matrix K + mu*I is numerically singular (mu = {mu:e})")]
    SingularShifted { mu: f64 },

    #[error("extended Gram matrix is numerically singular (Schur complement {schur:e})")]
    DegenerateSchur { schur: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("regularization weight must be nonnegative, got {0}")]
    NegativeMu(f64),

    #[error("closed-form B-sharp norm needs a kernel with proven (A4); use grid_sup_norm for {0}")]
    FormulaUnavailable(String),

    #[error("expansions use different kernels")]
    KernelMismatch,

    #[error("expected a {expected} expansion")]
    SideMismatch { expected: &'static str },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// True for failures of the numerics on valid input (singular or
    /// degenerate systems), false for malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularGram { .. } | Error::SingularShifted { .. } | Error::DegenerateSchur { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
