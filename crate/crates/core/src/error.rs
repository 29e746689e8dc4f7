use thiserror::Error;

use crate::cm_solver::CmReport;

pub type Result<T> = std::result::Result<T, Error>;

/// A pair `r1 < r2` at which a function that should be non-decreasing satisfies `f(r1) > f(r2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub r1: f64,
    pub r2: f64,
    pub f1: f64,
    pub f2: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature budget exceeded on [{a}, {b}] after {subdivisions} subdivisions (estimate {estimate:e}, error {error:e})")]
    BudgetExceeded {
        a: f64,
        b: f64,
        subdivisions: usize,
        estimate: f64,
        error: f64,
    },

    #[error("improper tail does not decay: T*h(T) = {last_estimate:e} at T = {last_point:e}")]
    TailNotDecaying { last_point: f64, last_estimate: f64 },

    #[error("integrand is not finite at t = {at}")]
    NonFinite { at: f64 },

    #[error("radius {r} outside of the domain (0, {domain}]")]
    OutOfDomain { r: f64, domain: f64 },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("convex conjugate is +infinity at interior point s = {s}")]
    UnboundedConjugate { s: f64 },

    #[error("reference profile {index} is degenerate: {reason}")]
    ReferenceDegenerate { index: usize, reason: String },

    #[error("F is not non-decreasing: F({}) = {} > F({}) = {}", .0.r1, .0.f1, .0.r2, .0.f2)]
    ConditionViolated(Witness),

    #[error("measure is not admissible: {:?}", .0.reasons)]
    Inadmissible(Box<CmReport>),

    #[error("body of revolution is degenerate (R_K = 0)")]
    DegenerateBody,

    #[error("point lies on the equator and has no gnomonic image")]
    EquatorPoint,
}
