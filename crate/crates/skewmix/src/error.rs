//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A matrix expected to be symmetric positive definite failed a pivot check.
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// Input dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Degrees of freedom must be strictly positive.
    #[error("invalid degrees of freedom: {0}")]
    InvalidDof(f64),

    /// Multivariate distribution functions are supported up to a fixed dimension.
    #[error("dimension {dim} exceeds the supported bound {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    /// Variance argument must be strictly positive.
    #[error("invalid variance: {0}")]
    InvalidVariance(f64),

    /// The requested truncated moment does not exist for these degrees of freedom.
    #[error("moment undefined: requires nu > {required}, got {nu}")]
    MomentUndefined { nu: f64, required: f64 },

    /// Empty input where at least one element is required.
    #[error("empty input")]
    EmptyInput,

    /// The skewness vector violates the feasibility condition of its family.
    #[error("infeasible skewness: {0}")]
    InfeasibleSkewness(String),

    /// Rejection sampling exceeded its trial budget for a single draw.
    #[error("rejection budget exceeded after {trials} trials (acceptance too low)")]
    RejectionBudgetExceeded { trials: u64 },

    /// A mixture component lost effective support during fitting.
    #[error("degenerate component {component}: {reason}")]
    DegenerateComponent { component: usize, reason: String },

    /// The degrees-of-freedom update could not be evaluated.
    #[error("degrees-of-freedom solve failed: {0}")]
    DofSolveFailed(String),

    /// A data row has zero likelihood under every component, even in log space.
    #[error("observation {row} has zero likelihood under all components")]
    AllZeroLikelihood { row: usize },

    /// The importance sample behind a Monte-Carlo E-step is too degenerate to use.
    #[error("effective sample size {ess:.1} below the minimum {min}")]
    EffectiveSampleSizeTooLow { ess: f64, min: f64 },

    /// Initialization could not produce a usable starting model.
    #[error("initialization failed: {0}")]
    InitFailed(String),

    /// Options passed to a fit are inconsistent with the chosen family.
    #[error("invalid options: {0}")]
    InvalidOptions(String),
}
