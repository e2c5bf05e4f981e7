use num_complex::Complex64;
use thiserror::Error;

use crate::shadowing::ContinuationResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("H_b is not invertible for b = 0")]
    ZeroJacobian,

    #[error("root finding for period {period} did not converge: {reason}")]
    RootFindingFailed { period: usize, reason: String },

    #[error("window is empty or too short for this operation")]
    EmptyWindow,

    #[error("window geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("cycle multiplier has modulus {modulus} within tolerance of 1")]
    UnitMultiplier { modulus: f64 },

    #[error("derivative vanishes at index {index} (|x| = {modulus})")]
    ZeroDerivative { index: usize, modulus: f64 },

    #[error("cyclic system is singular (monodromy eigenvalue near 1)")]
    SingularSystem,

    #[error("contraction failed at b = {b} (residual {residual:e} after {iterations} iterations)")]
    ContractionFailure {
        b: Complex64,
        residual: f64,
        iterations: usize,
        /// Everything that converged before the failing step.
        partial: Box<ContinuationResult>,
    },

    #[error("iterate left the ball of radius {radius} around its anchor at b = {b} (distance {distance})")]
    BallEscape {
        b: Complex64,
        radius: f64,
        distance: f64,
        partial: Box<ContinuationResult>,
    },

    #[error("|b| = {modulus} exceeds the continuation cap {cap}")]
    BeyondReach { modulus: f64, cap: f64 },

    #[error("division by (near) zero at index {index}")]
    ZeroDivision { index: usize },

    #[error("no convergence after {iterations} iterations (last update {last_update:e})")]
    NoConvergence { iterations: usize, last_update: f64 },

    #[error("iterate hit the square-root branch cut at index {index}")]
    BranchCollision { index: usize },

    #[error("cycle {index} is not repelling (|multiplier| = {modulus})")]
    NonRepellingCycle { index: usize, modulus: f64 },

    #[error("no cycles supplied")]
    EmptyCycles,

    #[error("unknown predicate '{name}' (registered: {registered})")]
    UnknownPredicate { name: String, registered: String },

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("at least two elements are required")]
    TooFewElements,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::InvalidArgument(_)
                | Error::Parse(_)
                | Error::UnknownPredicate { .. }
                | Error::GeometryMismatch(_)
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}
