use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{as_general, as_lambda, as_lambda_quadratic, gibbs_moments, GibbsMoments, Weight, WeightPair};
use crate::convex_core::{translate, ConvexFunction, DomainStatus, Oracle, PointwiseMax, PointwiseMin};
use crate::error::{Error, Result};
use crate::legendre::dual_oracle;
use crate::quadrature::{integrate_box_best_effort, IntegrationResult, IntegrationSpec};
use crate::report::{Comparison, Relation, Verdict};

/// Whether a value came from closed forms or from quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    ClosedForm,
    Quadrature,
}

/// Tolerance for identities evaluated in closed form.
const CLOSED_FORM_TOL: f64 = 1e-12;

fn weight_scale(w: &Weight) -> f64 {
    match w {
        Weight::ScaledExp { ln_c } => *ln_c,
        _ => 0.0,
    }
}

fn closed_form_value(weights: &WeightPair, lambda: f64, psi: &dyn ConvexFunction) -> Option<f64> {
    if !weights.is_exponential() {
        return None;
    }
    let q = psi.as_quadratic()?;
    let ln_c = (1.0 - lambda) * weight_scale(&weights.f1) + lambda * weight_scale(&weights.f2);
    Some(ln_c.exp() * as_lambda_quadratic(&q, lambda))
}

/// Both sides of `as_λ(F1,F2,ψ) = as_{1-λ}(F2,F1,ψ*)`.
#[derive(Debug, Clone, Serialize)]
pub struct DualityReport {
    pub lambda: f64,
    pub route: Route,
    pub primal: IntegrationResult,
    pub dual: IntegrationResult,
    /// `|primal - dual| / max(|primal|, |dual|)`.
    pub residual: f64,
    pub comparison: Comparison,
}

/// Duality residual with `ψ*` from [`dual_oracle`].
pub fn duality_residual(
    weights: &WeightPair,
    lambda: f64,
    psi: &Oracle,
    spec: &IntegrationSpec,
) -> Result<DualityReport> {
    let dual = dual_oracle(psi)?;
    duality_residual_with(weights, lambda, psi.as_ref(), dual.as_ref(), spec)
}

/// Duality residual against a given dual oracle. Quadratic oracles with
/// exponential weights use the Gaussian closed forms on both sides.
pub fn duality_residual_with(
    weights: &WeightPair,
    lambda: f64,
    psi: &dyn ConvexFunction,
    dual: &dyn ConvexFunction,
    spec: &IntegrationSpec,
) -> Result<DualityReport> {
    let swapped = weights.swapped();
    let closed = closed_form_value(weights, lambda, psi).zip(closed_form_value(&swapped, 1.0 - lambda, dual));
    let (route, primal, dual_side, tol) = match closed {
        Some((a, b)) => (
            Route::ClosedForm,
            IntegrationResult::exact(a),
            IntegrationResult::exact(b),
            CLOSED_FORM_TOL,
        ),
        None => {
            let (a, b) = rayon::join(
                || as_general(weights, lambda, psi, spec),
                || as_general(&swapped, 1.0 - lambda, dual, spec),
            );
            (Route::Quadrature, a?, b?, spec.rel_tol)
        }
    };
    let comparison = Comparison::relative(
        primal.value,
        primal.error_estimate,
        dual_side.value,
        dual_side.error_estimate,
        Relation::Equal,
        tol,
    );
    Ok(DualityReport {
        lambda,
        route,
        residual: -comparison.margin,
        primal,
        dual: dual_side,
        comparison,
    })
}

/// `λ -> log as_λ(ψ)` on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct AsaProfile {
    pub lambdas: Vec<f64>,
    pub values: Vec<IntegrationResult>,
    pub log_values: Vec<f64>,
    pub log_errors: Vec<f64>,
}

impl AsaProfile {
    /// Computes the profile, in parallel over λ.
    pub fn compute(psi: &dyn ConvexFunction, lambdas: &[f64], spec: &IntegrationSpec) -> Result<Self> {
        let values = lambdas
            .par_iter()
            .map(|&l| as_lambda(l, psi, spec))
            .collect::<Result<Vec<_>>>()?;
        let mut log_values = Vec::with_capacity(values.len());
        let mut log_errors = Vec::with_capacity(values.len());
        for (l, v) in lambdas.iter().zip(&values) {
            if !(v.value > 0.0 && v.value.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "as_lambda({l}) = {} is not positive and finite",
                    v.value
                )));
            }
            log_values.push(v.value.ln());
            log_errors.push(v.relative_error());
        }
        Ok(Self {
            lambdas: lambdas.to_vec(),
            values,
            log_values,
            log_errors,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityViolation {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    /// `log as_mid - (log as_lo + log as_hi)/2`.
    pub excess: f64,
    pub error_budget: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    pub profile: AsaProfile,
    /// Number of midpoint triples tested.
    pub triples: usize,
    pub violations: Vec<ConvexityViolation>,
    /// Largest excess over all triples, violating or not.
    pub max_excess: f64,
}

/// Floor on the log-profile error budget.
const CONVEXITY_TOL: f64 = 1e-9;

/// Midpoint convexity of `log as_λ` over every grid triple whose middle
/// entry is the midpoint of the outer two.
pub fn log_convexity_check(
    psi: &dyn ConvexFunction,
    lambdas: &[f64],
    spec: &IntegrationSpec,
) -> Result<ConvexityReport> {
    let profile = AsaProfile::compute(psi, lambdas, spec)?;
    let m = lambdas.len();
    let mut violations = Vec::new();
    let mut triples = 0;
    let mut max_excess = f64::NEG_INFINITY;
    for i in 0..m {
        for k in i + 1..m {
            let mid = 0.5 * (lambdas[i] + lambdas[k]);
            let span = (lambdas[k] - lambdas[i]).abs();
            let Some(j) = (0..m).find(|&j| j != i && j != k && (lambdas[j] - mid).abs() <= 1e-12 * (1.0 + span)) else {
                continue;
            };
            triples += 1;
            let lv = &profile.log_values;
            let le = &profile.log_errors;
            let excess = lv[j] - 0.5 * (lv[i] + lv[k]);
            max_excess = max_excess.max(excess);
            let budget = (le[j] + 0.5 * (le[i] + le[k])).max(CONVEXITY_TOL / 3.0);
            if excess > 3.0 * budget {
                violations.push(ConvexityViolation {
                    lambda_lo: lambdas[i],
                    lambda_hi: lambdas[k],
                    excess,
                    error_budget: budget,
                });
            }
        }
    }
    Ok(ConvexityReport {
        profile,
        triples,
        violations,
        max_excess,
    })
}

/// Translates `ψ` so that `e^{-ψ}` has barycenter 0. Even oracles are
/// already centered and are returned unchanged.
fn centered(psi: &Oracle, spec: &IntegrationSpec) -> Result<(Oracle, GibbsMoments)> {
    let moments = gibbs_moments(psi.as_ref(), spec)?;
    if psi.is_even() {
        return Ok((psi.clone(), moments));
    }
    Ok((translate(psi, &moments.barycenter), moments))
}

/// Functional isoperimetric inequality at one λ, after centering.
#[derive(Debug, Clone, Serialize)]
pub struct IsoperimetricReport {
    pub lambda: f64,
    pub barycenter: Vec<f64>,
    pub as_value: IntegrationResult,
    /// `∫_{X_ψ} e^{-ψ}`.
    pub regular_mass: IntegrationResult,
    /// `∫ e^{-ψ}`.
    pub mass: IntegrationResult,
    /// `(2π)^{nλ} M^{1-2λ}` with the mass `M` appropriate for λ.
    pub bound: f64,
    /// `as_λ(ψ) / as_λ(|·|²/2)`.
    pub ratio_lhs: f64,
    /// `(M / (2π)^{n/2})^{1-2λ}`.
    pub ratio_rhs: f64,
    /// Closed-form `(as_λ, bound)` for quadratic oracles.
    pub closed_form: Option<(f64, f64)>,
    pub comparison: Comparison,
}

/// `as_λ(ψ) <= (2π)^{nλ}(∫_{X_ψ} e^{-ψ})^{1-2λ}` on `[0, 1/2]`, the same with
/// `∫ e^{-ψ}` on `(1/2, 1]`, and `>=` for `λ < 0`. The `λ < 0` row is flagged
/// unless `ψ` has an analytic Hessian; `λ > 1` is reported only.
pub fn isoperimetric_check(lambda: f64, psi: &Oracle, spec: &IntegrationSpec) -> Result<IsoperimetricReport> {
    let (psi_c, moments) = centered(psi, spec)?;
    let n = psi.dim();
    let exp = WeightPair::exponential();
    let as_value = as_general(&exp, lambda, psi_c.as_ref(), spec)?;
    let regular_mass = if lambda == 0.0 {
        as_value.clone()
    } else {
        as_general(&exp, 0.0, psi_c.as_ref(), spec)?
    };
    let mass = gibbs_moments(psi_c.as_ref(), spec)?.mass;
    let m = if lambda > 0.5 { &mass } else { &regular_mass };
    let expo = 1.0 - 2.0 * lambda;
    let bound = (2.0 * PI).powf(n as f64 * lambda) * m.value.powf(expo);
    let bound_err = bound * expo.abs() * m.relative_error();
    let relation = if lambda < 0.0 { Relation::AtLeast } else { Relation::AtMost };
    let smooth = psi_c.hess(&vec![0.0; n]).is_some();
    let comparison = Comparison::relative(
        as_value.value,
        as_value.error_estimate,
        bound,
        bound_err,
        relation,
        spec.rel_tol,
    )
    .flag_if(lambda > 1.0 || (lambda < 0.0 && !smooth));
    let closed_form = psi_c.as_quadratic().map(|q| {
        let z = (2.0 * PI).powf(n as f64 / 2.0) / q.det().sqrt() * (-q.offset()).exp();
        (as_lambda_quadratic(&q, lambda), (2.0 * PI).powf(n as f64 * lambda) * z.powf(expo))
    });
    let eucl = super::euclidean_value(n);
    Ok(IsoperimetricReport {
        lambda,
        barycenter: moments.barycenter,
        ratio_lhs: as_value.value / eucl,
        ratio_rhs: (m.value / eucl).powf(expo),
        as_value,
        regular_mass,
        mass,
        bound,
        closed_form,
        comparison,
    })
}

/// Remark product `as_λ(ψ) as_λ(ψ*) <= (2π)^n`.
#[derive(Debug, Clone, Serialize)]
pub struct RemarkProduct {
    pub lambda: f64,
    pub primal: IntegrationResult,
    pub dual: IntegrationResult,
    pub product: f64,
    pub comparison: Comparison,
}

#[derive(Debug, Clone, Serialize)]
pub struct SantaloReport {
    pub barycenter: Vec<f64>,
    pub primal_integral: IntegrationResult,
    pub dual_integral: IntegrationResult,
    pub product: f64,
    pub bound: f64,
    pub comparison: Comparison,
    pub remark: Vec<RemarkProduct>,
    /// `P^{1/n}`: an empirical value for the constant of the reverse inequality.
    pub reverse_constant: f64,
}

/// `∫ e^{-ψ}`, computed without clipping.
fn gibbs_mass(psi: &dyn ConvexFunction, spec: &IntegrationSpec) -> Result<IntegrationResult> {
    integrate_box_best_effort(|x| (-psi.eval(x)).exp(), psi.bounding_box(), spec)
}

/// `∫e^{-ψ} ∫e^{-ψ*} <= (2π)^n` after centering, plus the remark products
/// for each λ in `lambdas` (asserted on `[0, 1/2]`, flagged elsewhere).
pub fn santalo_product(psi: &Oracle, lambdas: &[f64], spec: &IntegrationSpec) -> Result<SantaloReport> {
    let (psi_c, moments) = centered(psi, spec)?;
    let n = psi.dim();
    let dual = dual_oracle(&psi_c)?;
    let primal_integral = gibbs_mass(psi_c.as_ref(), spec)?;
    let dual_integral = gibbs_mass(dual.as_ref(), spec)?;
    let product = primal_integral.value * dual_integral.value;
    let product_err = product * (primal_integral.relative_error() + dual_integral.relative_error());
    let bound = (2.0 * PI).powi(n as i32);
    let comparison = Comparison::relative(product, product_err, bound, 0.0, Relation::AtMost, spec.rel_tol);
    let remark = lambdas
        .iter()
        .map(|&l| {
            let a = as_lambda(l, psi_c.as_ref(), spec)?;
            let b = as_lambda(l, dual.as_ref(), spec)?;
            let p = a.value * b.value;
            let err = a.error_estimate * b.value.abs() + b.error_estimate * a.value.abs();
            let comparison = Comparison::relative(p, err, bound, 0.0, Relation::AtMost, spec.rel_tol)
                .flag_if(!(0.0..=0.5).contains(&l));
            Ok(RemarkProduct {
                lambda: l,
                primal: a,
                dual: b,
                product: p,
                comparison,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SantaloReport {
        barycenter: moments.barycenter,
        reverse_constant: product.powf(1.0 / n as f64),
        primal_integral,
        dual_integral,
        product,
        bound,
        comparison,
        remark,
    })
}

/// Minimizer of `z -> ∫ e^{-(ψ_z)*}`.
#[derive(Debug, Clone, Serialize)]
pub struct SantaloPoint {
    pub z: Vec<f64>,
    pub dual_integral: f64,
    pub iterations: usize,
    /// False when `z = 0` was taken from evenness.
    pub searched: bool,
}

fn ln_dual_integral(psi: &Oracle, z: &[f64], spec: &IntegrationSpec) -> f64 {
    let shifted = translate(psi, z);
    if shifted.domain(&vec![0.0; z.len()]) != DomainStatus::Interior {
        return f64::INFINITY;
    }
    let Ok(dual) = dual_oracle(&shifted) else {
        return f64::INFINITY;
    };
    match gibbs_mass(dual.as_ref(), spec) {
        Ok(r) if r.value > 0.0 && r.value.is_finite() => r.value.ln(),
        _ => f64::INFINITY,
    }
}

/// Santaló point; even oracles return 0 without searching.
pub fn santalo_point(psi: &Oracle, spec: &IntegrationSpec) -> Result<SantaloPoint> {
    if psi.is_even() {
        let z = vec![0.0; psi.dim()];
        let dual = dual_oracle(psi)?;
        return Ok(SantaloPoint {
            dual_integral: gibbs_mass(dual.as_ref(), spec)?.value,
            z,
            iterations: 0,
            searched: false,
        });
    }
    santalo_point_search(psi, spec)
}

const NM_MAX_ITER: usize = 400;

/// Nelder-Mead search started at the barycenter of `e^{-ψ}`.
pub fn santalo_point_search(psi: &Oracle, spec: &IntegrationSpec) -> Result<SantaloPoint> {
    let start = gibbs_moments(psi.as_ref(), spec)?.barycenter;
    let f = |z: &[f64]| ln_dual_integral(psi, z, spec);
    let (z, fz, iterations) = nelder_mead(f, &start, 0.25, 1e-7, NM_MAX_ITER)?;
    Ok(SantaloPoint {
        z,
        dual_integral: fz.exp(),
        iterations,
        searched: true,
    })
}

/// Minimizes `f` until the simplex diameter drops below `xtol`.
pub(crate) fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], step: f64, xtol: f64, max_iter: usize) -> Result<(Vec<f64>, f64, usize)> {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    if simplex.iter().all(|(_, v)| !v.is_finite()) {
        return Err(Error::InvalidArgument("no feasible start point for the simplex search".into()));
    }
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect() };
    for it in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diam = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diam <= xtol && simplex.iter().all(|(_, v)| v.is_finite()) {
            let (x, v) = simplex.swap_remove(0);
            return Ok((x, v, it));
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let refl = lerp(&centroid, &worst.0, -1.0);
        let fr = f(&refl);
        if fr < simplex[0].1 {
            let exp = lerp(&centroid, &worst.0, -2.0);
            let fe = f(&exp);
            simplex[n] = if fe < fr { (exp, fe) } else { (refl, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (refl, fr);
        } else {
            let (target, ft) = if fr < worst.1 { (refl, fr) } else { worst.clone() };
            let contr = lerp(&centroid, &target, 0.5);
            let fc = f(&contr);
            if fc < ft {
                simplex[n] = (contr, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x = lerp(&best, &entry.0, 0.5);
                    let fx = f(&x);
                    *entry = (x, fx);
                }
            }
        }
    }
    Err(Error::NoConvergence { iterations: max_iter })
}

#[derive(Debug, Clone, Serialize)]
pub struct ValuationReport {
    pub lambda: f64,
    pub psi1: IntegrationResult,
    pub psi2: IntegrationResult,
    pub max: IntegrationResult,
    pub min: IntegrationResult,
    pub residual: f64,
    pub comparison: Comparison,
}

const VALUATION_PROBES: usize = 4000;
const VALUATION_FACTOR: f64 = 4.0;

/// Sampled midpoint-convexity test of `min(ψ1, ψ2)`.
fn probe_min_convexity(psi1: &dyn ConvexFunction, psi2: &dyn ConvexFunction, seed: u64) -> Result<()> {
    let bbox = psi1.bounding_box().union(psi2.bounding_box());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = |x: &[f64]| psi1.eval(x).min(psi2.eval(x));
    let n = psi1.dim();
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|i| rng.random_range(bbox.lo[i]..=bbox.hi[i])).collect() };
    for _ in 0..VALUATION_PROBES {
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        let (mx, my) = (m(&x), m(&y));
        if !(mx.is_finite() && my.is_finite()) {
            continue;
        }
        let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        let gap = m(&mid) - 0.5 * (mx + my);
        if gap > 1e-9 * (1.0 + mx.abs() + my.abs()) {
            return Err(Error::NotAValuationInstance { point: mid, gap });
        }
    }
    Ok(())
}

/// `as_λ(ψ1) + as_λ(ψ2) = as_λ(max) + as_λ(min)` when `min(ψ1, ψ2)` is convex.
pub fn valuation_check(psi1: &Oracle, psi2: &Oracle, lambda: f64, spec: &IntegrationSpec) -> Result<ValuationReport> {
    if psi1.dim() != psi2.dim() {
        return Err(Error::InvalidArgument("valuation pair differs in dimension".into()));
    }
    probe_min_convexity(psi1.as_ref(), psi2.as_ref(), spec.seed)?;
    let hi: Oracle = Arc::new(PointwiseMax::new(psi1.clone(), psi2.clone()));
    let lo: Oracle = Arc::new(PointwiseMin::new(psi1.clone(), psi2.clone()));
    let values = [psi1, psi2, &hi, &lo]
        .par_iter()
        .map(|p| as_lambda(lambda, p.as_ref(), spec))
        .collect::<Result<Vec<_>>>()?;
    let [a, b, c, d] = <[IntegrationResult; 4]>::try_from(values).expect("four values");
    let comparison = Comparison::relative(
        a.value + b.value,
        a.error_estimate + b.error_estimate,
        c.value + d.value,
        c.error_estimate + d.error_estimate,
        Relation::Equal,
        spec.rel_tol,
    )
    .with_factor(VALUATION_FACTOR);
    Ok(ValuationReport {
        lambda,
        residual: -comparison.margin,
        psi1: a,
        psi2: b,
        max: c,
        min: d,
        comparison,
    })
}

impl ValuationReport {
    pub fn verdict(&self) -> Verdict {
        self.comparison.verdict
    }
}
