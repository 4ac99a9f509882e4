//! Functional L_λ-affine surface areas of convex functions, with the duality,
//! log-convexity, isoperimetric and Santaló checks built on them.

mod checks;
mod weights;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::convex_core::{
    dot, fd_gradient, fd_step, hessian, in_regular_set, ConvexFunction, DomainStatus, QuadraticForm, DEFAULT_DET_TOL,
};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_box_best_effort, IntegrationResult, IntegrationSpec};

pub use checks::{
    duality_residual, duality_residual_with, isoperimetric_check, log_convexity_check, santalo_point,
    santalo_point_search, santalo_product, valuation_check, AsaProfile, ConvexityReport, ConvexityViolation,
    DualityReport, IsoperimetricReport, RemarkProduct, Route, SantaloPoint, SantaloReport, ValuationReport,
};
pub use weights::{Weight, WeightPair};
pub(crate) use checks::nelder_mead;

/// Default λ grid; entries outside `[0, 1]` need a C² oracle.
pub const DEFAULT_LAMBDA_GRID: [f64; 11] = [-0.5, -0.25, 0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0, 1.25, 1.5];

/// `(2π)^{n/2}`, the value at `|x|²/2` for every λ.
pub fn euclidean_value(n: usize) -> f64 {
    (2.0 * PI).powf(n as f64 / 2.0)
}

/// Closed form of `as_λ` for `ψ(x) = <A(x-z), x-z>/2 + a`:
/// `(2π)^{n/2} det(A)^{λ-1/2} exp((2λ-1)a + λ²<Az,z>/2)`.
pub fn as_lambda_quadratic(q: &QuadraticForm, lambda: f64) -> f64 {
    let z = q.center();
    let az = q.matrix() * z;
    let n = q.dim();
    euclidean_value(n)
        * q.det().powf(lambda - 0.5)
        * ((2.0 * lambda - 1.0) * q.offset() + 0.5 * lambda * lambda * az.dot(z)).exp()
}

/// `log` of the integrand at `x`; `Ok(None)` where the point is masked
/// (outside the domain, or outside `X_ψ` when `λ <= 0`).
fn ln_integrand(
    weights: &WeightPair,
    lambda: f64,
    psi: &dyn ConvexFunction,
    x: &[f64],
    det_tol: f64,
) -> Option<f64> {
    if psi.domain(x) != DomainStatus::Interior {
        return None;
    }
    let jet = psi.jet(x);
    let v = jet.value;
    if !v.is_finite() {
        return None;
    }
    let g = match jet.grad {
        Some(g) => g,
        None => fd_gradient(psi, x, fd_step(x)).ok()?,
    };
    let h: DMatrix<f64> = match jet.hess {
        Some(h) => h,
        None => {
            if lambda <= 0.0 && !in_regular_set(psi, x, det_tol) {
                return None;
            }
            hessian(psi, x).ok()?
        }
    };
    let det = roundoff_clean_det(&h);
    if lambda <= 0.0 && !(det >= det_tol) {
        return None;
    }
    let mut ln = 0.0;
    if lambda != 1.0 {
        ln += (1.0 - lambda) * weights.f1.ln(v);
    }
    if lambda != 0.0 {
        ln += lambda * weights.f2.ln(dot(x, g.as_slice()) - v);
        ln += lambda * det.max(0.0).ln();
    }
    Some(ln)
}

/// `det h`, with values inside the rounding error of the elimination read
/// as zero. Rank-deficient Hessians (gauges of polytopes, say) otherwise
/// leave `det^λ` of pure noise in the integrand.
fn roundoff_clean_det(h: &DMatrix<f64>) -> f64 {
    let n = h.nrows();
    let det = h.determinant();
    let scale = h.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if det.abs() <= 8.0 * n as f64 * f64::EPSILON * scale.powi(n as i32) {
        0.0
    } else {
        det
    }
}

/// `as_λ(F1, F2, ψ) = ∫ F1(ψ)^{1-λ} F2(<x,∇ψ> - ψ)^λ (det ∇²ψ)^λ dx` with the
/// default determinant threshold for `X_ψ`.
pub fn as_general(
    weights: &WeightPair,
    lambda: f64,
    psi: &dyn ConvexFunction,
    spec: &IntegrationSpec,
) -> Result<IntegrationResult> {
    as_general_masked(weights, lambda, psi, spec, DEFAULT_DET_TOL)
}

/// [`as_general`] with an explicit `det_tol`.
///
/// For `λ <= 0` the integral runs over `X_ψ = {det ∇²ψ >= det_tol}`; a
/// non-finite power there means `det_tol` admits singular Hessians and is
/// reported as `NonFiniteIntegrand`. For `λ > 0` it runs over the domain.
pub fn as_general_masked(
    weights: &WeightPair,
    lambda: f64,
    psi: &dyn ConvexFunction,
    spec: &IntegrationSpec,
    det_tol: f64,
) -> Result<IntegrationResult> {
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda = {lambda}")));
    }
    let r = integrate_box_best_effort(
        |x| match ln_integrand(weights, lambda, psi, x, det_tol) {
            None => f64::INFINITY,
            Some(ln) if ln == f64::NEG_INFINITY => 0.0,
            Some(ln) if ln.is_finite() => ln.exp(),
            Some(_) => f64::NAN,
        },
        psi.bounding_box(),
        spec,
    )?;
    let tail = r.value.abs() * (-spec.truncation_level).exp();
    Ok(r.with_extra_error(tail))
}

/// `as_λ(ψ) = as_λ(e^{-t}, e^{-t}, ψ)`.
pub fn as_lambda(lambda: f64, psi: &dyn ConvexFunction, spec: &IntegrationSpec) -> Result<IntegrationResult> {
    as_general(&WeightPair::exponential(), lambda, psi, spec)
}

/// Mass and barycenter of `e^{-ψ}`.
#[derive(Debug, Clone, Serialize)]
pub struct GibbsMoments {
    pub mass: IntegrationResult,
    pub barycenter: Vec<f64>,
    /// Error estimate of each barycenter coordinate.
    pub barycenter_error: Vec<f64>,
}

/// `∫ e^{-ψ}` and `∫ x e^{-ψ} / ∫ e^{-ψ}` over the bounding box.
///
/// First moments are taken about the lower box corner so each integrand is
/// positive and the relative stopping rule stays meaningful.
pub fn gibbs_moments(psi: &dyn ConvexFunction, spec: &IntegrationSpec) -> Result<GibbsMoments> {
    let bbox = psi.bounding_box();
    let weight = |x: &[f64]| (-psi.eval(x)).exp();
    let mass = integrate_box_best_effort(weight, bbox, spec)?;
    if !(mass.value > 0.0) {
        return Err(Error::InvalidArgument(format!("∫e^(-psi) = {}", mass.value)));
    }
    let mut barycenter = Vec::with_capacity(psi.dim());
    let mut barycenter_error = Vec::with_capacity(psi.dim());
    for i in 0..psi.dim() {
        let lo = bbox.lo[i];
        let m = integrate_box_best_effort(|x| (x[i] - lo) * weight(x), bbox, spec)?;
        let b = m.value / mass.value;
        barycenter.push(lo + b);
        barycenter_error.push(m.error_estimate / mass.value + b * mass.relative_error());
    }
    Ok(GibbsMoments {
        mass,
        barycenter,
        barycenter_error,
    })
}
