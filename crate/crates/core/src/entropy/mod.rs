//! Entropy and Fisher information of log-concave measures, and both
//! directions of the log-Sobolev inequality.

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::asa_log::gibbs_moments;
use crate::convex_core::{
    dot, gradient, translate, ConvexFunction, DomainStatus, Oracle, DEFAULT_DET_TOL,
};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_box_best_effort, IntegrationResult, IntegrationSpec};
use crate::report::{Comparison, Relation};

/// Largest irregular mass for which the reverse inequality is still asserted.
pub const MAX_IRREGULAR_MASS: f64 = 0.01;

/// Declared tolerance for the entropy inequalities (absolute units).
const ENTROPY_TOL: f64 = 1e-9;

/// `S(γ_n) = (n/2) log(2πe)`.
pub fn gaussian_entropy(n: usize) -> f64 {
    0.5 * n as f64 * (2.0 * PI * E).ln()
}

/// Probability measure `dμ = e^{-ψ}/Z dx` with cached normalization and
/// first two moments.
#[derive(Debug, Clone)]
pub struct LogConcaveMeasure {
    psi: Oracle,
    z: IntegrationResult,
    barycenter: Vec<f64>,
    barycenter_error: Vec<f64>,
    second_moment: IntegrationResult,
}

impl LogConcaveMeasure {
    pub fn new(psi: Oracle, spec: &IntegrationSpec) -> Result<Self> {
        let m = gibbs_moments(psi.as_ref(), spec)?;
        let mut mu = Self {
            psi,
            z: m.mass,
            barycenter: m.barycenter,
            barycenter_error: m.barycenter_error,
            second_moment: IntegrationResult::exact(0.0),
        };
        mu.second_moment = mu.expectation(|x, _| dot(x, x), spec)?;
        Ok(mu)
    }

    pub fn psi(&self) -> &Oracle {
        &self.psi
    }

    pub fn dim(&self) -> usize {
        self.psi.dim()
    }

    /// `Z = ∫ e^{-ψ}`.
    pub fn normalization(&self) -> &IntegrationResult {
        &self.z
    }

    pub fn log_z(&self) -> f64 {
        self.z.value.ln()
    }

    pub fn barycenter(&self) -> &[f64] {
        &self.barycenter
    }

    pub fn barycenter_error(&self) -> &[f64] {
        &self.barycenter_error
    }

    /// `∫ |x|² dμ`.
    pub fn second_moment(&self) -> &IntegrationResult {
        &self.second_moment
    }

    /// The same measure translated so that its barycenter is 0. Even
    /// potentials are returned as they are.
    pub fn centered(&self, spec: &IntegrationSpec) -> Result<Self> {
        if self.psi.is_even() {
            return Ok(self.clone());
        }
        Self::new(translate(&self.psi, &self.barycenter), spec)
    }

    /// `∫ g(x, ψ(x)) dμ` over the domain. The error of `Z` is propagated
    /// linearly.
    pub fn expectation<G>(&self, g: G, spec: &IntegrationSpec) -> Result<IntegrationResult>
    where
        G: Fn(&[f64], f64) -> f64 + Sync,
    {
        let log_z = self.log_z();
        let r = integrate_box_best_effort(
            |x| {
                let v = self.psi.eval(x);
                if !v.is_finite() {
                    return 0.0;
                }
                g(x, v) * (-v - log_z).exp()
            },
            self.psi.bounding_box(),
            spec,
        )?;
        let extra = r.value.abs() * self.z.relative_error();
        Ok(r.with_extra_error(extra))
    }

    /// Like [`expectation`](Self::expectation) for integrands that need the
    /// gradient; points where it is unavailable are dropped and counted.
    fn expectation_with_gradient<G>(&self, g: G, spec: &IntegrationSpec) -> Result<IntegrationResult>
    where
        G: Fn(&[f64], f64, &[f64]) -> f64 + Sync,
    {
        self.expectation_masked(
            |x, v| match gradient(self.psi.as_ref(), x) {
                Ok(dg) => g(x, v, dg.as_slice()),
                Err(_) => f64::INFINITY,
            },
            spec,
        )
    }

    /// Interior points only; a `+inf` from `g` drops the point.
    fn expectation_masked<G>(&self, g: G, spec: &IntegrationSpec) -> Result<IntegrationResult>
    where
        G: Fn(&[f64], f64) -> f64 + Sync,
    {
        let log_z = self.log_z();
        let r = integrate_box_best_effort(
            |x| {
                if self.psi.domain(x) != DomainStatus::Interior {
                    return 0.0;
                }
                let v = self.psi.eval(x);
                let w = g(x, v);
                if w == f64::INFINITY {
                    return f64::INFINITY;
                }
                w * (-v - log_z).exp()
            },
            self.psi.bounding_box(),
            spec,
        )?;
        let extra = r.value.abs() * self.z.relative_error();
        Ok(r.with_extra_error(extra))
    }
}

/// `S(μ) = ∫ (ψ + log Z) dμ`.
pub fn shannon_entropy(mu: &LogConcaveMeasure, spec: &IntegrationSpec) -> Result<IntegrationResult> {
    let log_z = mu.log_z();
    mu.expectation(|_, v| v + log_z, spec)
}

/// Relative entropy, Fisher information and second-moment gap against `γ_n`.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyTriple {
    /// `H(μ|γ_n) = ∫ (-ψ - log Z + |x|²/2 + (n/2) log 2π) dμ`.
    pub h: IntegrationResult,
    /// `I(μ|γ_n) = ∫ |x - ∇ψ|² dμ`.
    pub i: IntegrationResult,
    /// `C(μ) = ∫ |x|² dμ - n`.
    pub c: IntegrationResult,
}

pub fn relative_entropy_and_fisher(mu: &LogConcaveMeasure, spec: &IntegrationSpec) -> Result<EntropyTriple> {
    let n = mu.dim() as f64;
    let shift = -mu.log_z() + 0.5 * n * (2.0 * PI).ln();
    let h = mu.expectation(|x, v| -v + shift + 0.5 * dot(x, x), spec)?;
    let i = mu.expectation_with_gradient(
        |x, _, g| x.iter().zip(g).map(|(a, b)| (a - b) * (a - b)).sum(),
        spec,
    )?;
    let mut c = mu.second_moment().clone();
    c.value -= n;
    Ok(EntropyTriple { h, i, c })
}

#[derive(Debug, Clone, Serialize)]
pub struct LogSobolevReport {
    pub triple: EntropyTriple,
    /// `C/2 + (n/2) log(1 + (I - C)/n)`.
    pub improved_bound: f64,
    /// `I/2`.
    pub gross_bound: f64,
    pub improved: Comparison,
    pub gross: Comparison,
}

/// `H <= C/2 + (n/2) log(1 + (I-C)/n) <= I/2`.
pub fn logsob_improved_check(mu: &LogConcaveMeasure, spec: &IntegrationSpec) -> Result<LogSobolevReport> {
    let t = relative_entropy_and_fisher(mu, spec)?;
    let n = mu.dim() as f64;
    let (h, i, c) = (t.h.value, t.i.value, t.c.value);
    let arg = 1.0 + (i - c) / n;
    let improved_bound = 0.5 * c + 0.5 * n * arg.ln();
    // d/dI and d/dC of the bound give the linear error propagation.
    let bound_err = 0.5 * t.i.error_estimate / arg + (0.5 - 0.5 / arg).abs() * t.c.error_estimate;
    let gross_bound = 0.5 * i;
    let improved = Comparison::absolute(h, t.h.error_estimate, improved_bound, bound_err, Relation::AtMost, ENTROPY_TOL);
    let gross = Comparison::absolute(h, t.h.error_estimate, gross_bound, 0.5 * t.i.error_estimate, Relation::AtMost, ENTROPY_TOL);
    Ok(LogSobolevReport {
        triple: t,
        improved_bound,
        gross_bound,
        improved,
        gross,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReverseLogSobolevReport {
    /// `∫_{X_ψ} log det ∇²ψ dμ`.
    pub lhs: IntegrationResult,
    /// `2 (S(γ_n) - S(μ))`.
    pub rhs: f64,
    pub entropy: IntegrationResult,
    /// `μ(Ω_ψ \ X_ψ)`.
    pub irregular_mass: f64,
    /// `∫ <x, ∇ψ> dμ` for the centered measure.
    pub boundary_term: IntegrationResult,
    pub comparison: Comparison,
    /// `∫ <x, ∇ψ> dμ <= n`.
    pub boundary: Comparison,
}

fn log_det(psi: &dyn ConvexFunction, x: &[f64]) -> Option<f64> {
    let h = match psi.hess(x) {
        Some(h) => h,
        None => {
            if !crate::convex_core::in_regular_set(psi, x, DEFAULT_DET_TOL) {
                return None;
            }
            crate::convex_core::hessian(psi, x).ok()?
        }
    };
    let d = h.determinant();
    (d >= DEFAULT_DET_TOL).then(|| d.ln())
}

/// `∫ log det ∇²ψ dμ <= 2 (S(γ_n) - S(μ))`, evaluated on the centered
/// measure together with the boundary bound `∫ <x,∇ψ> dμ <= n`.
///
/// Fails with `DegenerateHessian` when more than 1% of the mass lies
/// outside `X_ψ`; the true left side is then `-inf`.
pub fn reverse_logsob_check(mu: &LogConcaveMeasure, spec: &IntegrationSpec) -> Result<ReverseLogSobolevReport> {
    let mu = mu.centered(spec)?;
    let psi = mu.psi().clone();
    let n = mu.dim();
    let irregular = mu.expectation_masked(
        |x, _| if log_det(psi.as_ref(), x).is_some() { 0.0 } else { 1.0 },
        spec,
    )?;
    let irregular_mass = irregular.value.max(0.0);
    if irregular_mass > MAX_IRREGULAR_MASS {
        return Err(Error::DegenerateHessian { mass: irregular_mass });
    }
    let lhs = mu.expectation_masked(|x, _| log_det(psi.as_ref(), x).unwrap_or(f64::INFINITY), spec)?;
    let entropy = shannon_entropy(&mu, spec)?;
    let rhs = 2.0 * (gaussian_entropy(n) - entropy.value);
    let comparison = Comparison::absolute(
        lhs.value,
        lhs.error_estimate,
        rhs,
        2.0 * entropy.error_estimate,
        Relation::AtMost,
        ENTROPY_TOL,
    );
    let boundary_term = mu.expectation_with_gradient(|x, _, g| dot(x, g), spec)?;
    let boundary = Comparison::absolute(
        boundary_term.value,
        boundary_term.error_estimate,
        n as f64,
        0.0,
        Relation::AtMost,
        ENTROPY_TOL,
    );
    Ok(ReverseLogSobolevReport {
        lhs,
        rhs,
        entropy,
        irregular_mass,
        boundary_term,
        comparison,
        boundary,
    })
}

#[cfg(test)]
mod tests;
