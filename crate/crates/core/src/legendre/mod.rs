//! Legendre transforms: closed form, pointwise maximization, Newton inversion
//! of the gradient, and grid conjugation; Young and McCann checks.

mod grid;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::convex_core::{
    dvec, estimate_bounding_box, gradient, in_regular_set, BoundingBox, ConvexFunction, DomainStatus, Jet, Oracle,
    QuadraticForm, DEFAULT_DET_TOL,
};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_box_best_effort, IntegrationResult, IntegrationSpec, DEFAULT_TRUNCATION_LEVEL};

pub use grid::{legendre_grid, legendre_grid_on, ConjugateMode, GridAxis, GridFunction, GridOracle};

/// Closed-form conjugate of a quadratic form.
pub fn legendre_quadratic(q: &QuadraticForm) -> QuadraticForm {
    q.legendre()
}

/// Settings for [`legendre_at`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LegendreSolver {
    pub max_iter: usize,
    /// The search box is the oracle box scaled by this factor about its center.
    pub box_scale: f64,
    pub tol: f64,
}

impl Default for LegendreSolver {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            box_scale: 4.0,
            tol: 1e-13,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegendreValue {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub evals: usize,
}

fn search_box(psi: &dyn ConvexFunction, scale: f64) -> BoundingBox {
    let b = psi.bounding_box();
    let c = b.center();
    BoundingBox::new(
        (0..b.dim()).map(|i| c[i] - scale * (c[i] - b.lo[i])).collect(),
        (0..b.dim()).map(|i| c[i] + scale * (b.hi[i] - c[i])).collect(),
    )
}

fn project(b: &BoundingBox, x: &mut [f64]) {
    for i in 0..x.len() {
        x[i] = x[i].clamp(b.lo[i], b.hi[i]);
    }
}

/// Ascent direction of `<x,y> - psi(x)`; finite differences shrink their
/// step near the domain boundary and fall back to one-sided differences.
fn ascent(psi: &dyn ConvexFunction, x: &[f64], y: &[f64], evals: &mut usize) -> Option<DVector<f64>> {
    if let Some(g) = psi.grad(x) {
        return Some(dvec(y) - g);
    }
    *evals += 2 * x.len();
    if let Ok(g) = gradient(psi, x) {
        return Some(dvec(y) - g);
    }
    let f0 = psi.eval(x);
    let mut h = 1e-6 * (1.0 + crate::convex_core::norm(x));
    let mut p = x.to_vec();
    let mut g = DVector::zeros(x.len());
    for i in 0..x.len() {
        p[i] = x[i] + h;
        let fp = psi.eval(&p);
        p[i] = x[i] - h;
        let fm = psi.eval(&p);
        p[i] = x[i];
        *evals += 2;
        g[i] = match (fp.is_finite(), fm.is_finite()) {
            (true, true) => (fp - fm) / (2.0 * h),
            (true, false) => (fp - f0) / h,
            (false, true) => (f0 - fm) / h,
            (false, false) => {
                h *= 0.5;
                0.0
            }
        };
    }
    Some(dvec(y) - g)
}

fn inward_start(psi: &dyn ConvexFunction, center: &[f64], start: &[f64]) -> Option<Vec<f64>> {
    let mut t = 1.0;
    for _ in 0..60 {
        let p: Vec<f64> = center.iter().zip(start).map(|(c, s)| c + t * (s - c)).collect();
        if psi.eval(&p).is_finite() {
            return Some(p);
        }
        t *= 0.5;
    }
    None
}

/// `psi*(y) = sup_x <x,y> - psi(x)` by multi-start projected gradient ascent.
///
/// Starts at the search-box center and its `2n` face midpoints. Declares
/// `Unbounded` when the best iterate rests on the search-box boundary while
/// the objective still rises outward by more than `1e-6`.
pub fn legendre_at(psi: &dyn ConvexFunction, y: &[f64], solver: &LegendreSolver) -> Result<LegendreValue> {
    let n = psi.dim();
    let sbox = search_box(psi, solver.box_scale);
    let center = sbox.center();
    let mut starts = vec![center.clone()];
    for d in 0..n {
        for side in [sbox.lo[d], sbox.hi[d]] {
            let mut p = center.clone();
            p[d] = 0.5 * (p[d] + side);
            starts.push(p);
        }
    }
    let objective = |x: &[f64]| crate::convex_core::dot(x, y) - psi.eval(x);
    let mut evals = 0usize;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let scale = sbox.hi.iter().zip(&sbox.lo).map(|(h, l)| h - l).fold(0.0, f64::max);

    for s in starts {
        let Some(mut x) = inward_start(psi, &center, &s) else { continue };
        let mut fx = objective(&x);
        evals += 1;
        let mut t = 0.1 * scale;
        for _ in 0..solver.max_iter {
            let Some(g) = ascent(psi, &x, y, &mut evals) else { break };
            let mut accepted = false;
            let mut stalled = false;
            for _ in 0..80 {
                let mut cand: Vec<f64> = x.iter().zip(g.iter()).map(|(a, b)| a + t * b).collect();
                project(&sbox, &mut cand);
                let step_len: f64 = cand.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
                if step_len == 0.0 {
                    break;
                }
                let fc = objective(&cand);
                evals += 1;
                let predicted: f64 = g.iter().zip(cand.iter().zip(&x)).map(|(gi, (c, xi))| gi * (c - xi)).sum();
                if fc.is_finite() && fc >= fx + 1e-4 * predicted {
                    stalled = fc - fx <= solver.tol * (1.0 + fx.abs());
                    x = cand;
                    fx = fc;
                    accepted = true;
                    t *= 2.0;
                    break;
                }
                t *= 0.5;
            }
            if stalled {
                break;
            }
            if !accepted {
                break;
            }
        }
        if let (Some(h), DomainStatus::Interior) = (psi.hess(&x), psi.domain(&x)) {
            // Newton polish for smooth objectives.
            for _ in 0..20 {
                let Some(g) = psi.grad(&x) else { break };
                let r = dvec(y) - g;
                let Some(step) = h.clone().lu().solve(&r) else { break };
                let mut cand: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                project(&sbox, &mut cand);
                let fc = objective(&cand);
                evals += 1;
                if fc.is_finite() && fc >= fx {
                    let done = (fc - fx) <= solver.tol * (1.0 + fx.abs());
                    x = cand;
                    fx = fc;
                    if done {
                        break;
                    }
                } else {
                    break;
                }
                if psi.hess(&x).is_none() {
                    break;
                }
            }
        }
        if best.as_ref().is_none_or(|(bv, _)| fx > *bv) {
            best = Some((fx, x));
        }
    }
    let (value, argmax) = best.ok_or(Error::EmptySupport)?;
    if let Some(dir) = outward_rise(psi, &sbox, &argmax, y, &mut evals) {
        return Err(Error::Unbounded { direction: dir });
    }
    Ok(LegendreValue { value, argmax, evals })
}

fn outward_rise(psi: &dyn ConvexFunction, sbox: &BoundingBox, x: &[f64], y: &[f64], evals: &mut usize) -> Option<Vec<f64>> {
    let g = ascent(psi, x, y, evals)?;
    let n = x.len();
    let mut dir = vec![0.0; n];
    let mut hit = false;
    for d in 0..n {
        let w = sbox.hi[d] - sbox.lo[d];
        let tol = 1e-9 * w;
        if x[d] >= sbox.hi[d] - tol && g[d] > 1e-6 {
            dir[d] = 1.0;
            hit = true;
        } else if x[d] <= sbox.lo[d] + tol && g[d] < -1e-6 {
            dir[d] = -1.0;
            hit = true;
        }
    }
    hit.then_some(dir)
}

/// Legendre transform evaluated pointwise by [`legendre_at`].
///
/// The gradient is the maximizer; `+inf` where the maximization is unbounded.
#[derive(Debug, Clone)]
pub struct NumericDual {
    psi: Oracle,
    solver: LegendreSolver,
    bbox: BoundingBox,
}

impl NumericDual {
    pub fn new(psi: Oracle) -> Result<Self> {
        let mut d = Self {
            bbox: psi.bounding_box().clone(),
            psi,
            solver: LegendreSolver::default(),
        };
        d.bbox = estimate_bounding_box(|y| d.eval(y), d.psi.dim(), DEFAULT_TRUNCATION_LEVEL)?;
        Ok(d)
    }

    pub fn primal(&self) -> &Oracle {
        &self.psi
    }
}

impl ConvexFunction for NumericDual {
    fn dim(&self) -> usize {
        self.psi.dim()
    }
    fn eval(&self, y: &[f64]) -> f64 {
        match legendre_at(self.psi.as_ref(), y, &self.solver) {
            Ok(v) => v.value,
            Err(_) => f64::INFINITY,
        }
    }
    fn grad(&self, y: &[f64]) -> Option<DVector<f64>> {
        legendre_at(self.psi.as_ref(), y, &self.solver).ok().map(|v| dvec(&v.argmax))
    }
    fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }
    fn legendre_dual(&self) -> Option<Oracle> {
        Some(self.psi.clone())
    }
    fn is_even(&self) -> bool {
        self.psi.is_even()
    }
    fn label(&self) -> String {
        format!("{}*", self.psi.label())
    }
}

/// Legendre transform of a smooth strictly convex `psi` by Newton inversion
/// of `grad psi`: `psi*(y) = <x,y> - psi(x)`, `grad psi*(y) = x`,
/// `hess psi*(y) = hess psi(x)^{-1}` where `grad psi(x) = y`.
#[derive(Debug, Clone)]
pub struct SmoothDual {
    psi: Oracle,
    minimizer: Vec<f64>,
    bbox: BoundingBox,
}

impl SmoothDual {
    pub fn new(psi: Oracle) -> Result<Self> {
        let n = psi.dim();
        if psi.grad(&vec![0.0; n]).is_none() || psi.hess(&vec![0.0; n]).is_none() {
            return Err(Error::InvalidArgument("smooth dual needs analytic gradient and Hessian".into()));
        }
        let mut d = Self {
            bbox: psi.bounding_box().clone(),
            minimizer: vec![0.0; n],
            psi,
        };
        d.minimizer = d.solve(&vec![0.0; n])?;
        d.bbox = estimate_bounding_box(|y| d.eval(y), n, DEFAULT_TRUNCATION_LEVEL)?;
        Ok(d)
    }

    /// Solves `grad psi(x) = y`.
    pub fn solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        let n = self.psi.dim();
        let yv = dvec(y);
        let mut x = self.minimizer.clone();
        let merit = |x: &[f64]| self.psi.eval(x) - crate::convex_core::dot(x, y);
        let mut fx = merit(&x);
        for it in 0..200 {
            let g = self.psi.grad(&x).ok_or(Error::IrregularPoint { point: x.clone() })? - &yv;
            let gn = g.norm();
            if gn <= 1e-13 * (1.0 + yv.norm()) {
                return Ok(x);
            }
            let h = self.psi.hess(&x).ok_or(Error::IrregularPoint { point: x.clone() })?;
            let step = h.clone().cholesky().map(|c| c.solve(&g)).unwrap_or_else(|| g.clone());
            let xn = crate::convex_core::norm(&x);
            if step.norm() <= 1e-14 * (1.0 + xn) && gn <= 1e-8 * (1.0 + yv.norm()) {
                return Ok(x);
            }
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let cand: Vec<f64> = (0..n).map(|i| x[i] - t * step[i]).collect();
                let fc = merit(&cand);
                // Near the solution the merit is flat to rounding; a halved
                // gradient residual is then the better acceptance test.
                let residual_drop = fc.is_finite()
                    && self.psi.grad(&cand).is_some_and(|gc| (gc - &yv).norm() <= 0.5 * gn);
                if residual_drop || (fc.is_finite() && fc <= fx - 1e-4 * t * g.dot(&step)) {
                    x = cand;
                    fx = fc;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                // Line search stalls only at rounding level; accept if the residual is small.
                if gn <= 1e-8 * (1.0 + yv.norm()) {
                    return Ok(x);
                }
                return Err(Error::NoConvergence { iterations: it });
            }
        }
        Err(Error::NoConvergence { iterations: 200 })
    }

    pub fn primal(&self) -> &Oracle {
        &self.psi
    }
}

impl ConvexFunction for SmoothDual {
    fn dim(&self) -> usize {
        self.psi.dim()
    }
    fn eval(&self, y: &[f64]) -> f64 {
        match self.solve(y) {
            Ok(x) => crate::convex_core::dot(&x, y) - self.psi.eval(&x),
            Err(_) => f64::INFINITY,
        }
    }
    fn grad(&self, y: &[f64]) -> Option<DVector<f64>> {
        self.solve(y).ok().map(|x| dvec(&x))
    }
    fn hess(&self, y: &[f64]) -> Option<DMatrix<f64>> {
        let x = self.solve(y).ok()?;
        self.psi.hess(&x)?.try_inverse()
    }
    fn jet(&self, y: &[f64]) -> Jet {
        match self.solve(y) {
            Ok(x) => Jet {
                value: crate::convex_core::dot(&x, y) - self.psi.eval(&x),
                hess: self.psi.hess(&x).and_then(|h| h.try_inverse()),
                grad: Some(dvec(&x)),
            },
            Err(_) => Jet {
                value: f64::INFINITY,
                grad: None,
                hess: None,
            },
        }
    }
    fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }
    fn legendre_dual(&self) -> Option<Oracle> {
        Some(self.psi.clone())
    }
    fn is_even(&self) -> bool {
        self.psi.is_even()
    }
    fn label(&self) -> String {
        format!("{}*", self.psi.label())
    }
}

/// Best available Legendre transform: closed form, then Newton inversion
/// for smooth oracles, then pointwise maximization.
pub fn dual_oracle(psi: &Oracle) -> Result<Oracle> {
    if let Some(d) = psi.legendre_dual() {
        return Ok(d);
    }
    let n = psi.dim();
    let probe = vec![0.0; n];
    if psi.grad(&probe).is_some() && psi.hess(&probe).is_some() && psi.domain(&probe) == DomainStatus::Interior {
        if let Ok(d) = SmoothDual::new(psi.clone()) {
            return Ok(Arc::new(d));
        }
    }
    Ok(Arc::new(NumericDual::new(psi.clone())?))
}

/// Result of [`young_check`].
#[derive(Debug, Clone, Serialize)]
pub struct YoungReport {
    pub pairs: usize,
    /// Pairs with `psi(x) + psi*(y) < <x,y> - tol`.
    pub inequality_violations: Vec<(Vec<f64>, Vec<f64>, f64)>,
    /// Largest `|psi*(grad psi(x)) - (<x, grad psi(x)> - psi(x))|`.
    pub max_equality_gap: f64,
    pub equality_checked: usize,
}

impl YoungReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.inequality_violations.is_empty() && self.max_equality_gap <= tol
    }
}

/// Young's inequality on sample pairs, and equality at `y = grad psi(x)`
/// for regular `x`.
pub fn young_check(psi: &Oracle, dual: &Oracle, pairs: &[(Vec<f64>, Vec<f64>)], tol: f64) -> YoungReport {
    let mut viol = Vec::new();
    let mut gap: f64 = 0.0;
    let mut eq = 0;
    for (x, y) in pairs {
        let px = psi.eval(x);
        let dy = dual.eval(y);
        let lhs = px + dy;
        let xy = crate::convex_core::dot(x, y);
        if lhs.is_finite() && lhs < xy - tol * (1.0 + xy.abs()) {
            viol.push((x.clone(), y.clone(), xy - lhs));
        }
        if in_regular_set(psi.as_ref(), x, DEFAULT_DET_TOL) {
            if let Ok(g) = gradient(psi.as_ref(), x) {
                let lhs = dual.eval(g.as_slice());
                let rhs = crate::convex_core::dot(x, g.as_slice()) - px;
                gap = gap.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
                eq += 1;
            }
        }
    }
    YoungReport {
        pairs: pairs.len(),
        inequality_violations: viol,
        max_equality_gap: gap,
        equality_checked: eq,
    }
}

/// Both sides of the change of variables `∫ f(grad psi) det hess psi = ∫ f`.
#[derive(Debug, Clone, Serialize)]
pub struct McCannReport {
    pub pushforward: IntegrationResult,
    pub direct: IntegrationResult,
    pub residual: f64,
    /// Combined relative error estimate of both sides.
    pub error_budget: f64,
}

/// `∫_{X_psi} f(grad psi(x)) det hess psi(x) dx` against `∫_{X_psi*} f(y) dy`.
pub fn mccann_identity_check<F>(psi: &Oracle, dual: &Oracle, f: F, spec: &IntegrationSpec) -> Result<McCannReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let lhs = integrate_box_best_effort(
        |x| {
            if psi.domain(x) != DomainStatus::Interior {
                return f64::INFINITY;
            }
            let (Some(g), Some(h)) = (psi.grad(x), psi.hess(x)) else {
                return f64::INFINITY;
            };
            let det = h.determinant();
            if det < DEFAULT_DET_TOL {
                return f64::INFINITY;
            }
            f(g.as_slice()) * det
        },
        psi.bounding_box(),
        spec,
    )?;
    let rhs = integrate_box_best_effort(
        |y| {
            if dual.domain(y) != DomainStatus::Interior {
                f64::INFINITY
            } else {
                f(y)
            }
        },
        dual.bounding_box(),
        spec,
    )?;
    let scale = lhs.value.abs().max(rhs.value.abs()).max(f64::MIN_POSITIVE);
    Ok(McCannReport {
        residual: (lhs.value - rhs.value).abs() / scale,
        error_budget: (lhs.error_estimate + rhs.error_estimate) / scale,
        pushforward: lhs,
        direct: rhs,
    })
}

#[cfg(test)]
mod tests;
