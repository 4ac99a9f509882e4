use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use super::{as_lambda_s, s_point, t_map, SConcaveFunction, EVEN_TOL};
use crate::convex_core::dot;
use crate::error::{Error, Result};
use crate::legendre::{legendre_at, LegendreSolver};
use crate::quadrature::{IntegrationResult, IntegrationSpec};
use crate::report::{Comparison, Relation};

/// Floor on the declared tolerance of s-concave comparisons; the dual side
/// is integrated through a nested solve.
const S_TOL: f64 = 1e-6;

const PROBES: usize = 12;
const PROBE_SEED: u64 = 0x5c0c;

#[derive(Debug, Clone, Serialize)]
pub struct SDualityReport {
    pub lambda: f64,
    pub s: f64,
    pub primal: IntegrationResult,
    /// `as_{1-λ}^{(s)}(ψ*_{(s)})`.
    pub dual: IntegrationResult,
    pub comparison: Comparison,
    /// Largest `|det ∇²ψ(x) (w/D*)^{n+2} det ∇²ψ*_{(s)}(y) - 1|` over probes,
    /// `y = T_ψ(x)`, `w = 1 - sψ*_{(s)}(y)`, `D* = 1 + s(<∇ψ*_{(s)}(y),y> - ψ*_{(s)}(y))`.
    pub hessian_residual: f64,
    /// Largest `|T_{ψ*}(T_ψ(x)) - x|` over probes.
    pub round_trip: f64,
    /// Largest `|(1 - sψ*_{(s)}(y))(1 + sψ*(y/(1 - sψ*_{(s)}(y)))) - 1|`.
    pub implicit_residual: f64,
}

/// `as_λ^{(s)}(ψ) = as_{1-λ}^{(s)}(ψ*_{(s)})`, with pointwise probes of the
/// Hessian product identity, the inverse map and the implicit relation to the
/// classical transform. Flagged for non-smooth profiles.
pub fn duality_s_check(lambda: f64, fs: &SConcaveFunction, spec: &IntegrationSpec) -> Result<SDualityReport> {
    let dual = fs.dual()?;
    let (primal, dual_value) = rayon::join(|| as_lambda_s(lambda, fs, spec), || as_lambda_s(1.0 - lambda, &dual, spec));
    let (primal, dual_value) = (primal?, dual_value?);
    let comparison = Comparison::relative(
        primal.value,
        primal.error_estimate,
        dual_value.value,
        dual_value.error_estimate,
        Relation::Equal,
        spec.rel_tol.max(S_TOL),
    )
    .flag_if(!fs.is_smooth());
    let (hessian_residual, round_trip, implicit_residual) = if fs.is_smooth() {
        pointwise_probes(fs, &dual)?
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    Ok(SDualityReport {
        lambda,
        s: fs.s(),
        primal,
        dual: dual_value,
        comparison,
        hessian_residual,
        round_trip,
        implicit_residual,
    })
}

fn pointwise_probes(fs: &SConcaveFunction, dual: &SConcaveFunction) -> Result<(f64, f64, f64)> {
    let s = fs.s();
    let n = fs.dim();
    let solver = LegendreSolver::default();
    let (mut hess_res, mut trip, mut implicit) = (0.0f64, 0.0f64, 0.0f64);
    for x in fs.probe_points(PROBES, 0.9, PROBE_SEED) {
        let tm = t_map(fs.psi().as_ref(), s, &x)?;
        let y = tm.y;
        let pj = fs.full_jet(&x).ok_or(Error::IrregularPoint { point: x.clone() })?;
        let dj = dual.full_jet(&y).ok_or(Error::IrregularPoint { point: y.clone() })?;
        let (dg, dh) = (dj.grad.unwrap(), dj.hess.unwrap());
        let w = 1.0 - s * dj.value;
        let d_star = 1.0 + s * (dot(dg.as_slice(), &y) - dj.value);
        let product = pj.hess.unwrap().determinant() * (w / d_star).powi(n as i32 + 2) * dh.determinant();
        hess_res = hess_res.max((product - 1.0).abs());

        let back = t_map(dual.psi().as_ref(), s, &y)?;
        let err = back.y.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        trip = trip.max(err);

        let z: Vec<f64> = y.iter().map(|v| v / w).collect();
        let classical = legendre_at(fs.psi().as_ref(), &z, &solver)?.value;
        implicit = implicit.max((w * (1.0 + s * classical) - 1.0).abs());
    }
    Ok((hess_res, trip, implicit))
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderSReport {
    pub lambda: f64,
    pub s: f64,
    pub value: IntegrationResult,
    pub integral_f: IntegrationResult,
    pub integral_dual: IntegrationResult,
    /// `(∫f)^{1-λ} (∫f°)^λ`.
    pub bound: f64,
    pub comparison: Comparison,
}

/// `as_λ^{(s)} <= (∫f)^{1-λ} (∫f°)^λ` for `λ ∈ [0,1]`, reversed outside.
pub fn holder_s_check(lambda: f64, fs: &SConcaveFunction, spec: &IntegrationSpec) -> Result<HolderSReport> {
    let dual = fs.dual()?;
    let value = as_lambda_s(lambda, fs, spec)?;
    let (integral_f, integral_dual) = rayon::join(|| fs.integral(spec), || dual.integral(spec));
    let (integral_f, integral_dual) = (integral_f?, integral_dual?);
    let bound = integral_f.value.powf(1.0 - lambda) * integral_dual.value.powf(lambda);
    let bound_err =
        bound * ((1.0 - lambda).abs() * integral_f.relative_error() + lambda.abs() * integral_dual.relative_error());
    let relation = if (0.0..=1.0).contains(&lambda) {
        Relation::AtMost
    } else {
        Relation::AtLeast
    };
    let comparison = Comparison::relative(
        value.value,
        value.error_estimate,
        bound,
        bound_err,
        relation,
        spec.rel_tol.max(S_TOL),
    )
    .flag_if(!fs.is_smooth());
    Ok(HolderSReport {
        lambda,
        s: fs.s(),
        value,
        integral_f,
        integral_dual,
        bound,
        comparison,
    })
}

/// `log((π/s)^n (1+ns) Γ(1+1/(2s))² / Γ(1+n/2+1/(2s))²)`.
pub fn s_logsob_constant(n: usize, s: f64) -> f64 {
    santalo_s_bound(n, s).ln() + (1.0 + n as f64 * s).ln()
}

/// `(∫ (1 - s|x|²)_+^{1/(2s)} dx)² = (π/s)^n Γ(1+1/(2s))² / Γ(1+n/2+1/(2s))²`.
pub fn santalo_s_bound(n: usize, s: f64) -> f64 {
    let n = n as f64;
    let a = 1.0 + 0.5 / s;
    (n * (std::f64::consts::PI / s).ln() + 2.0 * (ln_gamma(a) - ln_gamma(a + 0.5 * n))).exp()
}

#[derive(Debug, Clone, Serialize)]
pub struct SLogSobReport {
    pub s: f64,
    /// `μ(R^n)`.
    pub mass: IntegrationResult,
    /// `∫ log det ∇²ψ dμ`.
    pub lhs: IntegrationResult,
    /// `∫ log (1 + s(<x,∇ψ> - ψ))^{1/s+n} dμ`.
    pub log_term: IntegrationResult,
    /// `S(μ)`.
    pub entropy: IntegrationResult,
    pub constant: f64,
    pub rhs: f64,
    pub comparison: Comparison,
    pub integral_dual: IntegrationResult,
    pub santalo_product: f64,
    pub santalo_bound: f64,
    pub santalo: Comparison,
}

/// s-log-Sobolev inequality for an even profile with `∫f = 1`, with the
/// Santaló bound `∫f ∫f° <= (∫ (1 - s|x|²)_+^{1/(2s)})²` as a sub-check.
pub fn s_logsob_check(fs: &SConcaveFunction, spec: &IntegrationSpec) -> Result<SLogSobReport> {
    let s = fs.s();
    let n = fs.dim();
    let gap = fs.even_gap(&fs.probe_points(64, 0.99, PROBE_SEED));
    if gap > EVEN_TOL {
        return Err(Error::NotEven { gap });
    }
    let total = fs.integral(spec)?;
    if (total.value - 1.0).abs() > (10.0 * total.error_estimate).max(1e-8) {
        return Err(Error::NotNormalized { integral: total.value });
    }
    let weighted = |g: &(dyn Fn(&super::SPoint, f64) -> f64 + Sync)| {
        fs.integrate(
            |x| match s_point(fs, x) {
                Some(p) => {
                    let m = p.u.powf(1.0 / s - 1.0) * p.d / (1.0 + n as f64 * s);
                    if m > 0.0 {
                        g(&p, m) * m
                    } else {
                        0.0
                    }
                }
                None => 0.0,
            },
            spec,
        )
    };
    let mass = weighted(&|_, _| 1.0)?;
    let lhs = weighted(&|p, _| p.det.ln())?;
    let log_term = weighted(&|p, _| (1.0 / s + n as f64) * p.d.ln())?;
    let entropy = weighted(&|_, m| -m.ln())?;
    let constant = s_logsob_constant(n, s);
    let rhs = log_term.value - entropy.value + constant;
    let comparison = Comparison::absolute(
        lhs.value,
        lhs.error_estimate,
        rhs,
        log_term.error_estimate + entropy.error_estimate,
        Relation::AtMost,
        spec.rel_tol.max(S_TOL),
    )
    .flag_if(!fs.is_smooth());

    let integral_dual = fs.dual()?.integral(spec)?;
    let santalo_product = total.value * integral_dual.value;
    let santalo_bound = santalo_s_bound(n, s);
    let santalo = Comparison::relative(
        santalo_product,
        santalo_product * (total.relative_error() + integral_dual.relative_error()),
        santalo_bound,
        0.0,
        Relation::AtMost,
        spec.rel_tol.max(S_TOL),
    );
    Ok(SLogSobReport {
        s,
        mass,
        lhs,
        log_term,
        entropy,
        constant,
        rhs,
        comparison,
        integral_dual,
        santalo_product,
        santalo_bound,
        santalo,
    })
}
