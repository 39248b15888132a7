use thiserror::Error;

/// Errors raised by the solvers and the discrete operators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("shape mismatch: expected {expected} nodes, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("unsupported L^p exponent {0} (only 2 and 4)")]
    UnsupportedExponent(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field is zero")]
    ZeroField,

    #[error("field is proportional to the principal eigenvector")]
    ParallelToPrincipal,

    #[error("direction lies in the nonpositive subspace")]
    InNonpositiveSubspace,

    #[error("point is not scalable onto the Nehari set: J = {j}, <f(w),w> = {fw}")]
    NotScalable { j: f64, fw: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Newton iteration converged into the nonpositive subspace")]
    ConvergedToTilde,

    #[error("no critical point found")]
    NoCriticalPointFound,

    #[error("no synchronized pair: amplitude radicands are ({0}, {1})")]
    NoSynchronizedPair(f64, f64),

    #[error("degenerate denominator mu1*mu2 - beta^2 = {0:e}")]
    DegenerateDenominator(f64),

    #[error("positive subspace is empty")]
    EmptyPositiveSubspace,

    #[error("weight vanishes on the positive subspace")]
    DegenerateWeight,
}

pub type Result<T> = std::result::Result<T, Error>;
