//! The body `K_s(f) = {(x, y) : x/√s ∈ S_f, |y| <= f^s(x/√s)}` for `s = 1/k`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{as_lambda_s, sphere_measure, SConcaveFunction};
use crate::bodies::{as_p_body, tangent_basis, Body, BodyAsp, ConvexBody};
use crate::error::{Error, Result};
use crate::quadrature::{IntegrationResult, IntegrationSpec};
use crate::report::{Comparison, Relation};

/// `K_s(f)` for a one-dimensional profile, in coordinates `(y_1, .., y_k, x)`
/// so the axis of revolution is the last one.
///
/// The boundary is the zero set of `Φ(y, x) = |y| - F(x)` with
/// `F(x) = f^s(x/√s) = 1 - sψ(x/√s)`; gauge derivatives are recovered from
/// those of `Φ`.
#[derive(Debug, Clone)]
pub struct RevolutionBody {
    fs: SConcaveFunction,
    k: usize,
    /// `√s S_f = [lo, hi]`.
    lo: f64,
    hi: f64,
}

impl RevolutionBody {
    fn new(fs: SConcaveFunction, k: usize) -> Self {
        let r = fs.s().sqrt();
        let hi = r * fs.support().support(&[1.0]);
        let lo = -r * fs.support().support(&[-1.0]);
        Self { fs, k, lo, hi }
    }

    pub fn profile(&self) -> &SConcaveFunction {
        &self.fs
    }

    /// `F(x)`, `-inf` outside `√s S_f`.
    fn height(&self, x: f64) -> f64 {
        if !(x > self.lo && x < self.hi) {
            return f64::NEG_INFINITY;
        }
        let s = self.fs.s();
        let v = self.fs.psi().eval(&[x / s.sqrt()]);
        if v.is_finite() {
            1.0 - s * v
        } else {
            f64::NEG_INFINITY
        }
    }

    fn radius_y(&self, z: &[f64]) -> f64 {
        z[..self.k].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn phi(&self, z: &[f64]) -> f64 {
        self.radius_y(z) - self.height(z[self.k])
    }

    /// `∇Φ` and `∇²Φ` at a boundary point with `y ≠ 0`.
    fn phi_jet(&self, w: &[f64]) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let k = self.k;
        let s = self.fs.s();
        let ry = self.radius_y(w);
        if ry <= 0.0 {
            return None;
        }
        let j = self.fs.full_jet(&[w[k] / s.sqrt()])?;
        let dpsi = j.grad?[0];
        let d2psi = j.hess?[(0, 0)];
        let mut g = DVector::zeros(k + 1);
        let mut h = DMatrix::zeros(k + 1, k + 1);
        for i in 0..k {
            g[i] = w[i] / ry;
            for l in 0..k {
                let delta = if i == l { 1.0 } else { 0.0 };
                h[(i, l)] = (delta - w[i] * w[l] / (ry * ry)) / ry;
            }
        }
        // F' = -√s ψ'(x/√s), F'' = -ψ''(x/√s).
        g[k] = s.sqrt() * dpsi;
        h[(k, k)] = d2psi;
        Some((g, h))
    }

    fn boundary(&self, z: &[f64]) -> Option<(f64, Vec<f64>)> {
        let g = self.gauge(z);
        (g > 0.0 && g.is_finite()).then(|| (g, z.iter().map(|v| v / g).collect()))
    }
}

impl ConvexBody for RevolutionBody {
    fn dim(&self) -> usize {
        self.k + 1
    }

    /// Root of `t -> Φ(z/t)` by bisection.
    fn gauge(&self, z: &[f64]) -> f64 {
        if z.iter().all(|v| *v == 0.0) {
            return 0.0;
        }
        let inside = |t: f64| {
            let w: Vec<f64> = z.iter().map(|v| v / t).collect();
            self.phi(&w) <= 0.0
        };
        let (mut lo, mut hi) = (1.0, 1.0);
        while inside(lo) {
            lo *= 0.5;
        }
        while !inside(hi) {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if inside(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `max_x v_x x + |v_y| F(x)` over `√s S_f`, a concave maximization.
    fn support(&self, v: &[f64]) -> f64 {
        let k = self.k;
        let vy = v[..k].iter().map(|a| a * a).sum::<f64>().sqrt();
        let obj = |x: f64| {
            let f = self.height(x).max(0.0);
            v[k] * x + vy * f
        };
        let (mut a, mut b) = (self.lo, self.hi);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        for _ in 0..200 {
            if obj(c) > obj(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - phi * (b - a);
            d = a + phi * (b - a);
        }
        obj(0.5 * (a + b)).max(obj(self.lo)).max(obj(self.hi))
    }

    fn gauge_grad(&self, z: &[f64]) -> Option<DVector<f64>> {
        let (_, w) = self.boundary(z)?;
        let (g, _) = self.phi_jet(&w)?;
        let gw = g.dot(&DVector::from_column_slice(&w));
        Some(g / gw)
    }

    /// `∇²||·||` vanishes on `w` and equals `Tᵀ∇²Φ T / <∇Φ, w>` on the
    /// tangent space; it scales like `1/||z||`.
    fn gauge_hess(&self, z: &[f64]) -> Option<DMatrix<f64>> {
        let n = self.dim();
        let (t, w) = self.boundary(z)?;
        let (g, h) = self.phi_jet(&w)?;
        let wv = DVector::from_column_slice(&w);
        let gw = g.dot(&wv);
        let tb = tangent_basis(&(&g / g.norm()));
        let shape = tb.transpose() * &h * &tb / gw;
        let mut basis = DMatrix::zeros(n, n);
        basis.set_column(0, &wv);
        for j in 0..n - 1 {
            basis.set_column(j + 1, &tb.column(j));
        }
        let inv = basis.try_inverse()?;
        let mut core = DMatrix::zeros(n, n);
        core.view_mut((1, 1), (n - 1, n - 1)).copy_from(&shape);
        Some(inv.transpose() * core * inv / t)
    }

    fn polar(&self) -> Result<Body> {
        Err(Error::InvalidArgument("the polar of a lifted body is not implemented".into()))
    }

    fn curvature_positive_ae(&self) -> bool {
        self.fs.is_smooth()
    }

    fn circle_breaks(&self) -> Vec<f64> {
        // Rims where |y| = F = 0 sit on the axis of revolution.
        vec![std::f64::consts::FRAC_PI_2, 1.5 * std::f64::consts::PI]
    }

    fn is_even(&self) -> bool {
        self.fs.psi().is_even()
    }

    fn label(&self) -> String {
        format!("lift[k={},{}]", self.k, self.fs.label())
    }
}

/// `K_s(f)` for `s = 1/k`; only `n = 1` and `k ∈ {1, 2}` are built.
pub fn lift_body(fs: &SConcaveFunction) -> Result<RevolutionBody> {
    let s = fs.s();
    let k = (1.0 / s).round();
    if (1.0 / s - k).abs() > 1e-12 || k < 1.0 {
        return Err(Error::UnsupportedS { s, reason: "s must be 1/k for a positive integer k" });
    }
    let k = k as usize;
    if fs.dim() != 1 || k > 2 {
        return Err(Error::UnsupportedS { s, reason: "lifted bodies are built for n = 1 and k <= 2" });
    }
    Ok(RevolutionBody::new(fs.clone(), k))
}

#[derive(Debug, Clone, Serialize)]
pub struct LiftReport {
    pub lambda: f64,
    pub s: f64,
    /// `(n + 1/s) λ / (1 - λ)`.
    pub p: f64,
    /// `(1 + ns) as_λ^{(s)}(ψ)`.
    pub functional: IntegrationResult,
    pub body_asp: BodyAsp,
    /// `as_p(K_s(f)) / (s^{n/2} |S^{1/s-1}|)`.
    pub body: IntegrationResult,
    pub comparison: Comparison,
}

/// Floor on the tolerance of the lift identity: the body side differentiates
/// a bisected gauge through the profile jets.
const LIFT_TOL: f64 = 1e-6;

/// `(1+ns) as_λ^{(s)}(ψ) = as_p(K_s(f)) / (s^{n/2} |S^{1/s-1}|)`.
pub fn lift_check(fs: &SConcaveFunction, lambda: f64, spec: &IntegrationSpec) -> Result<LiftReport> {
    let body = lift_body(fs)?;
    let s = fs.s();
    let n = fs.dim() as f64;
    let k = body.k;
    let p = (n + 1.0 / s) * lambda / (1.0 - lambda);
    let body: Body = Arc::new(body);
    let (functional, body_asp) = rayon::join(|| as_lambda_s(lambda, fs, spec), || as_p_body(&body, p, spec));
    let functional = functional?.scaled(1.0 + n * s);
    let body_asp = body_asp?;
    let scaled = body_asp.value.clone().scaled(1.0 / (s.powf(0.5 * n) * sphere_measure(k)));
    let comparison = Comparison::relative(
        functional.value,
        functional.error_estimate,
        scaled.value,
        scaled.error_estimate,
        Relation::Equal,
        spec.rel_tol.max(LIFT_TOL),
    )
    .flag_if(!fs.is_smooth());
    Ok(LiftReport {
        lambda,
        s,
        p,
        functional,
        body_asp,
        body: scaled,
        comparison,
    })
}
