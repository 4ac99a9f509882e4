//! The s-Legendre dual `ψ*_{(s)}(y) = sup_x (<x,y> - ψ(x)) / (1 - sψ(x))`,
//! its profile `f°`, and the change of variables `T_ψ`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::SConcaveFunction;
use crate::asa_log::nelder_mead;
use crate::bodies::Body;
use crate::convex_core::{dot, dvec, BoundingBox, ConvexFunction, DomainStatus, Jet, DEFAULT_DET_TOL};
use crate::error::{Error, Result};
use crate::legendre::{legendre_at, LegendreSolver};

const MAX_OUTER: usize = 200;
const MAX_NEWTON: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SDualValue {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub iterations: usize,
}

/// `argmax_x <x,z> - ψ(x)` by damped Newton from `x`, keeping `ψ` finite.
///
/// `None` when `ψ` has no analytic jets or the Hessian is not positive
/// definite along the way.
fn newton_argmax(psi: &dyn ConvexFunction, z: &DVector<f64>, start: &[f64]) -> Option<Vec<f64>> {
    let n = start.len();
    let mut x = start.to_vec();
    let objective = |x: &[f64]| dot(x, z.as_slice()) - psi.eval(x);
    let mut fx = objective(&x);
    if !fx.is_finite() {
        return None;
    }
    for _ in 0..MAX_NEWTON {
        let j = psi.jet(&x);
        let r = z - j.grad?;
        let rn = r.norm();
        if rn <= 1e-14 * (1.0 + z.norm()) {
            return Some(x);
        }
        let step = j.hess?.cholesky()?.solve(&r);
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..80 {
            let cand: Vec<f64> = (0..n).map(|i| x[i] + t * step[i]).collect();
            let fc = objective(&cand);
            if fc.is_finite() && fc >= fx + 1e-4 * t * r.dot(&step) {
                moved = true;
                x = cand;
                fx = fc;
                break;
            }
            // Flat to rounding: accept when the residual drops.
            if fc.is_finite() && psi.grad(&cand).is_some_and(|g| (z - g).norm() < 0.5 * rn) {
                moved = true;
                x = cand;
                fx = fc;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            return (rn <= 1e-9 * (1.0 + z.norm())).then_some(x);
        }
        if t * step.norm() <= 1e-16 * (1.0 + crate::convex_core::norm(&x)) {
            return Some(x);
        }
    }
    Some(x)
}

/// `ψ*_{(s)}(y)` by Dinkelbach iteration on the ratio: each step maximizes
/// `<x, y/(1 - s t)> - ψ(x)` for the current ratio value `t`.
///
/// `y` outside `(1/s) S_f°` gives `OutsideDualSupport` with gap `1 - s h_{S_f}(y)`.
pub fn psi_star_s(fs: &SConcaveFunction, y: &[f64]) -> Result<SDualValue> {
    let s = fs.s();
    let psi = fs.psi().as_ref();
    let h = fs.support().support(y);
    if 1.0 - s * h <= 0.0 {
        return Err(Error::OutsideDualSupport { gap: 1.0 - s * h });
    }
    let ratio = |x: &[f64]| {
        let v = psi.eval(x);
        (dot(x, y) - v) / (1.0 - s * v)
    };
    let mut x = vec![0.0; fs.dim()];
    let mut t = ratio(&x);
    let yv = dvec(y);
    let solver = LegendreSolver::default();
    for it in 0..MAX_OUTER {
        let w = 1.0 - s * t;
        if w <= 0.0 {
            return Err(Error::OutsideDualSupport { gap: w });
        }
        let z = &yv / w;
        let next = match newton_argmax(psi, &z, &x) {
            Some(x) => x,
            None => legendre_at(psi, z.as_slice(), &solver)?.argmax,
        };
        let t_next = ratio(&next);
        if !t_next.is_finite() {
            return Err(Error::NoConvergence { iterations: it });
        }
        let done = t_next - t <= 1e-15 * (1.0 + t.abs());
        if t_next >= t {
            x = next;
            t = t_next;
        }
        if done {
            return Ok(SDualValue {
                value: t,
                argmax: x,
                iterations: it + 1,
            });
        }
    }
    Err(Error::NoConvergence { iterations: MAX_OUTER })
}

/// `f°(y) = inf_x (1 - s<x,y>)_+^{1/s} / f(x)` by multi-start simplex search
/// on the logarithm, independent of [`psi_star_s`].
pub fn s_dual_at(fs: &SConcaveFunction, y: &[f64]) -> Result<f64> {
    let s = fs.s();
    let n = fs.dim();
    if s * fs.support().support(y) >= 1.0 {
        // Some x in S_f has <x,y> >= 1/s, where the numerator vanishes.
        return Ok(0.0);
    }
    let objective = |x: &[f64]| {
        let fx = fs.f(x);
        let num = 1.0 - s * dot(x, y);
        if fx > 0.0 && num > 0.0 {
            num.ln() / s - fx.ln()
        } else {
            f64::INFINITY
        }
    };
    let mut starts = vec![vec![0.0; n]];
    let mut extent = f64::INFINITY;
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = sign;
            let r = fs.support().radial(&e);
            extent = extent.min(r);
            e[i] = 0.5 * sign * r;
            starts.push(e);
        }
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    for x0 in &starts {
        if !objective(x0).is_finite() {
            continue;
        }
        let Ok((x, v, _)) = nelder_mead(objective, x0, 0.2 * extent, 1e-12 * extent, 20_000) else { continue };
        // A restart from the optimum guards against simplex collapse.
        let (x, v) = match nelder_mead(objective, &x, 0.01 * extent, 1e-13 * extent, 20_000) {
            Ok((x2, v2, _)) if v2 < v => (x2, v2),
            _ => (x, v),
        };
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((x, v));
        }
    }
    let (_, v) = best.ok_or(Error::EmptySupport)?;
    Ok(v.exp())
}

/// `T_ψ(x)` and its differential.
#[derive(Debug, Clone, Serialize)]
pub struct TMap {
    pub y: Vec<f64>,
    /// `(1 - sψ) det ∇²ψ / (1 + s(<∇ψ,x> - ψ))^{n+1}`.
    pub jacobian: f64,
    /// `(1/D)(I - (s/D) ∇ψ xᵀ) ∇²ψ` with `D = 1 + s(<∇ψ,x> - ψ)`.
    #[serde(skip)]
    pub differential: DMatrix<f64>,
}

/// `T_ψ(x) = ∇ψ(x) / (1 + s(<∇ψ(x),x> - ψ(x)))` on `X_ψ`.
pub fn t_map(psi: &dyn ConvexFunction, s: f64, x: &[f64]) -> Result<TMap> {
    let n = x.len();
    let irregular = || Error::IrregularPoint { point: x.to_vec() };
    let j = psi.jet(x);
    if !j.value.is_finite() || 1.0 - s * j.value <= 0.0 {
        return Err(irregular());
    }
    let g = match j.grad {
        Some(g) => g,
        None => crate::convex_core::gradient(psi, x)?,
    };
    let h = match j.hess {
        Some(h) => h,
        None => crate::convex_core::hessian(psi, x)?,
    };
    let det = h.determinant();
    let d = 1.0 + s * (dot(x, g.as_slice()) - j.value);
    if !(det >= DEFAULT_DET_TOL) || d <= 0.0 {
        return Err(irregular());
    }
    let y = &g / d;
    let differential = (DMatrix::identity(n, n) - &g * dvec(x).transpose() * (s / d)) * &h / d;
    Ok(TMap {
        y: y.as_slice().to_vec(),
        jacobian: (1.0 - s * j.value) * det / d.powi(n as i32 + 1),
        differential,
    })
}

/// `ψ*_{(s)}` as a convex oracle on `(1/s) S_f°`.
///
/// With `x` the maximizer, `w = 1 - sψ*_{(s)}(y)` and `v = 1 - sψ(x)`:
/// `∇ψ*_{(s)}(y) = x / v`, and its Hessian follows from differentiating
/// `∇ψ(x) = y / w` in `y`.
#[derive(Debug, Clone)]
pub struct SDual {
    primal: SConcaveFunction,
    support: Body,
    bbox: BoundingBox,
}

impl SDual {
    pub fn new(primal: SConcaveFunction, support: Body) -> Self {
        let n = support.dim();
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            hi[i] = support.support(&e);
            e[i] = -1.0;
            lo[i] = -support.support(&e);
        }
        Self {
            primal,
            support,
            bbox: BoundingBox::new(lo, hi),
        }
    }

    pub fn primal(&self) -> &SConcaveFunction {
        &self.primal
    }

    pub fn solve(&self, y: &[f64]) -> Result<SDualValue> {
        psi_star_s(&self.primal, y)
    }

    fn jet_at(&self, y: &[f64]) -> Result<Jet> {
        let n = y.len();
        let s = self.primal.s();
        let sol = self.solve(y)?;
        let x = &sol.argmax;
        let pj = self.primal.full_jet(x).ok_or(Error::IrregularPoint { point: x.clone() })?;
        let gp = pj.grad.unwrap();
        let hp = pj.hess.unwrap();
        let w = 1.0 - s * sol.value;
        let v = 1.0 - s * pj.value;
        let xv = dvec(x);
        let grad = &xv / v;
        let rhs = DMatrix::identity(n, n) / w + dvec(y) * grad.transpose() * (s / (w * w));
        let dx = hp.lu().solve(&rhs).ok_or(Error::IrregularPoint { point: x.clone() })?;
        let dg = (DMatrix::identity(n, n) / v + &xv * gp.transpose() * (s / (v * v))) * dx;
        let hess = (&dg + dg.transpose()) * 0.5;
        Ok(Jet {
            value: sol.value,
            grad: Some(grad),
            hess: Some(hess),
        })
    }
}

impl ConvexFunction for SDual {
    fn dim(&self) -> usize {
        self.support.dim()
    }
    fn eval(&self, y: &[f64]) -> f64 {
        self.solve(y).map_or(f64::INFINITY, |v| v.value)
    }
    fn grad(&self, y: &[f64]) -> Option<DVector<f64>> {
        self.jet_at(y).ok()?.grad
    }
    fn hess(&self, y: &[f64]) -> Option<DMatrix<f64>> {
        self.jet_at(y).ok()?.hess
    }
    fn jet(&self, y: &[f64]) -> Jet {
        self.jet_at(y).unwrap_or(Jet {
            value: self.eval(y),
            grad: None,
            hess: None,
        })
    }
    fn domain(&self, y: &[f64]) -> DomainStatus {
        let g = self.support.gauge(y);
        if g < 1.0 {
            DomainStatus::Interior
        } else if g == 1.0 {
            DomainStatus::Boundary
        } else {
            DomainStatus::Outside
        }
    }
    fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }
    fn is_even(&self) -> bool {
        self.primal.psi().is_even()
    }
    fn label(&self) -> String {
        format!("{}*s", self.primal.label())
    }
}
