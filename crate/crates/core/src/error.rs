use thiserror::Error;

use crate::quadrature::IntegrationResult;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("finite-difference stencil leaves the domain at {point:?}")]
    OutsideDomain { point: Vec<f64> },

    #[error("matrix is singular (|det| = {det:e})")]
    SingularMatrix { det: f64 },

    #[error("Legendre objective is unbounded in direction {direction:?}")]
    Unbounded { direction: Vec<f64> },

    #[error("grid function is +inf everywhere")]
    EmptyDomain,

    #[error("evaluation budget exhausted after {} evaluations", partial.evals)]
    BudgetExhausted { partial: IntegrationResult },

    #[error("effective sample size {ess:.1} is below 1% of the budget {budget}")]
    DegenerateWeights { ess: f64, budget: usize },

    #[error("dimension {dim} is not supported here")]
    UnsupportedDimension { dim: usize },

    #[error("integrand is not finite at {point:?}")]
    NonFiniteIntegrand { point: Vec<f64> },

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("min(psi1, psi2) fails the convexity probe at {point:?} (gap {gap:e})")]
    NotAValuationInstance { point: Vec<f64>, gap: f64 },

    #[error("irregular mass {mass:.3} exceeds 1% of the measure")]
    DegenerateHessian { mass: f64 },

    #[error("the origin is not an interior point of the body")]
    OriginNotInterior,

    #[error("boundary point {point:?} is flat (curvature {curvature:e})")]
    FlatPoint { point: Vec<f64>, curvature: f64 },

    #[error("the exponent p = {p} is not supported")]
    UnsupportedExponent { p: f64 },

    #[error("the s-concave profile has empty support")]
    EmptySupport,

    #[error("1 - s psi*_(s)(y) = {gap:e} <= 0: y lies outside the dual support")]
    OutsideDualSupport { gap: f64 },

    #[error("point {point:?} is not in the regular set")]
    IrregularPoint { point: Vec<f64> },

    #[error("profile is not even (max |f(x) - f(-x)| = {gap:e})")]
    NotEven { gap: f64 },

    #[error("profile integrates to {integral} instead of 1")]
    NotNormalized { integral: f64 },

    #[error("s = {s} is not supported here ({reason})")]
    UnsupportedS { s: f64, reason: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
