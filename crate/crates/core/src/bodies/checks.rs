use serde::Serialize;

use super::{as_p_body, ball_volume, volume, Body, BodyAsp, GaugeSquared};
use crate::asa_log::{as_lambda, euclidean_value};
use crate::error::{Error, Result};
use crate::quadrature::{IntegrationResult, IntegrationSpec};
use crate::report::{Comparison, Relation};

/// Floor on the declared relative tolerance of body-side comparisons; the
/// curvature integrands of `l_q` balls are singular on the axes.
const BODY_TOL: f64 = 1e-6;

/// `λ = p / (n + p)`.
pub fn lambda_of_p(p: f64, n: usize) -> f64 {
    p / (n as f64 + p)
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremNormReport {
    pub p: f64,
    pub lambda: f64,
    /// `as_λ(||·||_K²/2)`.
    pub functional: IntegrationResult,
    /// `(2π)^{n/2} / (n|B_2^n|) as_p(K)`.
    pub body: IntegrationResult,
    pub flat_fraction: f64,
    pub comparison: Comparison,
}

/// Functional affine surface area of the half squared gauge against the
/// rescaled body-side value.
///
/// For `p <= 0` with a flat part of positive measure both numbers are
/// reported and the row is flagged: the functional side only sees the cone
/// over the curved part, while `κ^0 = 1` on flat facets.
pub fn theorem_norm_check(k: &Body, p: f64, spec: &IntegrationSpec) -> Result<TheoremNormReport> {
    let n = k.dim();
    let lambda = lambda_of_p(p, n);
    let asp = as_p_body(k, p, spec)?;
    let scale = euclidean_value(n) / (n as f64 * ball_volume(n));
    let body = asp.value.clone().scaled(scale);
    let functional = as_lambda(lambda, &GaugeSquared::new(k.clone()), spec)?;
    let comparison = Comparison::relative(
        functional.value,
        functional.error_estimate,
        body.value,
        body.error_estimate,
        Relation::Equal,
        spec.rel_tol.max(BODY_TOL),
    )
    .flag_if(p <= 0.0 && asp.flat_fraction > 0.0);
    Ok(TheoremNormReport {
        p,
        lambda,
        functional,
        body,
        flat_fraction: asp.flat_fraction,
        comparison,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AspDualityReport {
    pub p: f64,
    /// `n² / p`.
    pub p_dual: f64,
    pub primal: BodyAsp,
    pub dual: BodyAsp,
    pub comparison: Comparison,
}

/// `as_p(K) = as_{n²/p}(K°)`.
pub fn asp_duality_check(k: &Body, p: f64, spec: &IntegrationSpec) -> Result<AspDualityReport> {
    if p == 0.0 {
        return Err(Error::UnsupportedExponent { p });
    }
    let n = k.dim() as f64;
    let p_dual = n * n / p;
    let polar = k.polar()?;
    let (primal, dual) = rayon::join(|| as_p_body(k, p, spec), || as_p_body(&polar, p_dual, spec));
    let (primal, dual) = (primal?, dual?);
    let comparison = Comparison::relative(
        primal.value.value,
        primal.value.error_estimate,
        dual.value.value,
        dual.value.error_estimate,
        Relation::Equal,
        spec.rel_tol.max(BODY_TOL),
    )
    .flag_if(p < 0.0 && !k.curvature_positive_ae());
    Ok(AspDualityReport {
        p,
        p_dual,
        primal,
        dual,
        comparison,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LpIsoperimetricReport {
    pub p: f64,
    /// `as_p(K) / as_p(B_2^n)`.
    pub ratio: f64,
    /// `(|K| / |B_2^n|)^{(n-p)/(n+p)}`.
    pub bound: f64,
    pub volume: IntegrationResult,
    pub comparison: Comparison,
}

/// `as_p(K)/as_p(B) <= (|K|/|B|)^{(n-p)/(n+p)}` for `p >= 0`, reversed for
/// `-n < p < 0`.
///
/// Rows are flagged when `K` is not symmetric, when `p < 0` and the
/// curvature is not positive almost everywhere, and for `p < -n`, where
/// only a bound with an unknown constant holds.
pub fn lp_isoperimetric_check(k: &Body, p: f64, spec: &IntegrationSpec) -> Result<LpIsoperimetricReport> {
    let n = k.dim() as f64;
    let asp = as_p_body(k, p, spec)?;
    let vol = volume(k, spec)?;
    let ball_asp = n * ball_volume(k.dim());
    let ratio = asp.value.value / ball_asp;
    let e = (n - p) / (n + p);
    let bound = (vol.value / ball_volume(k.dim())).powf(e);
    let ratio_err = asp.value.error_estimate / ball_asp;
    let bound_err = bound * e.abs() * vol.relative_error();
    let relation = if p >= 0.0 { Relation::AtMost } else { Relation::AtLeast };
    let comparison = Comparison::relative(ratio, ratio_err, bound, bound_err, relation, spec.rel_tol.max(BODY_TOL)).flag_if(
        !k.is_even() || p < -n || (p < 0.0 && !k.curvature_positive_ae()),
    );
    Ok(LpIsoperimetricReport {
        p,
        ratio,
        bound,
        volume: vol,
        comparison,
    })
}
