//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building models or running solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// Root system or multiplicity data violates a structural requirement.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// The standing assumption λ > 0 (or λ = 0 with k ≡ 0) fails.
    #[error("standing assumption violated: {0}")]
    StandingAssumption(String),

    /// Reflection group closure exceeded the safety cap.
    #[error("reflection group generation exceeded cap of {cap} elements")]
    GroupCap { cap: usize },

    /// Operation requires a product (Z₂^d-type) reflection group.
    #[error("unsupported reflection group: {0}")]
    UnsupportedGroup(String),

    /// Domain kind cannot represent the requested operation.
    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    /// Text input (polynomial, config file, CLI spec) failed to parse.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// A caller-supplied argument is outside the operation's contract.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A numerical procedure (quadrature, linear solve) missed its tolerance.
    #[error("did not converge: {0}")]
    NoConvergence(String),

    /// A Monte Carlo path exceeded its step budget before exiting.
    #[error("path {path_id} exceeded the step budget of {budget} steps")]
    StepBudget { path_id: u64, budget: u64 },

    /// Run configuration is inconsistent (truncation overflow, bad grid, ...).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
