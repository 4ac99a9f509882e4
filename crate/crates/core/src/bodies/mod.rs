//! Convex bodies through their gauge and support functions, Gauss curvature
//! of the boundary, and the body-side L_p-affine surface area.

mod checks;
mod oracles;
mod shapes;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::convex_core::{fd_hessian, fd_step, gradient, hessian};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_circle_with_breakpoints, integrate_sphere, IntegrationResult, IntegrationSpec};

pub use checks::{
    asp_duality_check, lambda_of_p, lp_isoperimetric_check, theorem_norm_check, AspDualityReport, LpIsoperimetricReport,
    TheoremNormReport,
};
pub use oracles::{Gauge, GaugeSquared, Indicator};
pub use shapes::{Ellipsoid, LinearImage, PBall, Polytope};

/// Curvature below this counts as flat.
pub const KAPPA_TOL: f64 = 1e-8;

/// `|B_2^n| = π^{n/2} / Γ(1 + n/2)`.
pub fn ball_volume(n: usize) -> f64 {
    PI.powf(n as f64 / 2.0) / gamma(1.0 + n as f64 / 2.0)
}

/// Convex body with the origin in its interior.
pub trait ConvexBody: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// `||x||_K = min{t >= 0 : x ∈ tK}`.
    fn gauge(&self, x: &[f64]) -> f64;

    /// `h_K(y) = max_{x ∈ K} <x, y>`.
    fn support(&self, y: &[f64]) -> f64;

    /// `r(u) = 1/||u||_K` for a unit vector `u`.
    fn radial(&self, u: &[f64]) -> f64 {
        1.0 / self.gauge(u)
    }

    /// `None` where the gauge is not differentiable.
    fn gauge_grad(&self, _x: &[f64]) -> Option<DVector<f64>> {
        None
    }

    fn gauge_hess(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    fn polar(&self) -> Result<Body>;

    /// Closed-form volume, when known.
    fn volume(&self) -> Option<f64> {
        None
    }

    /// `M` when `K = {<Mx, x> <= 1}`.
    fn ellipsoid_matrix(&self) -> Option<DMatrix<f64>> {
        None
    }

    /// True when the curvature is positive almost everywhere on the boundary.
    fn curvature_positive_ae(&self) -> bool;

    /// Angles of boundary kinks, for planar bodies.
    fn circle_breaks(&self) -> Vec<f64> {
        Vec::new()
    }

    fn is_even(&self) -> bool {
        false
    }

    fn label(&self) -> String;
}

pub type Body = Arc<dyn ConvexBody>;

/// Local boundary data in the radial direction `u`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryPoint {
    pub x: Vec<f64>,
    pub normal: Vec<f64>,
    pub curvature: f64,
    /// `<x, N_K(x)>`; the cone measure is `<x, N> dμ_K / (n|K|)`.
    pub support_number: f64,
    /// `r(u)^n / <x, N>`, the density of `μ_K` against `du`.
    pub surface_density: f64,
}

/// Estimator for the Gauss curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurvatureMethod {
    /// Gauge Hessian on the tangent space over `|∇||·||_K|^{n-1}`.
    Direct,
    /// `det ∇²(||·||_K²/2)(x) <x, N>^{n+1}` with a finite-difference Hessian.
    Hesse,
}

fn gauge_gradient(k: &Body, x: &[f64]) -> Result<DVector<f64>> {
    match k.gauge_grad(x) {
        Some(g) => Ok(g),
        None => gradient(&Gauge::new(k.clone()), x),
    }
}

/// Orthonormal basis of `N^⊥` as columns.
pub(crate) fn tangent_basis(normal: &DVector<f64>) -> DMatrix<f64> {
    let n = normal.len();
    let mut basis: Vec<DVector<f64>> = vec![normal.clone()];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| normal[i].abs().total_cmp(&normal[j].abs()));
    for i in order {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        for b in &basis {
            let c = b.dot(&v);
            v -= b * c;
        }
        let len = v.norm();
        if len > 1e-8 && basis.len() < n {
            basis.push(v / len);
        }
    }
    DMatrix::from_columns(&basis[1..])
}

fn direct_curvature(k: &Body, x: &[f64], grad: &DVector<f64>) -> Result<f64> {
    let h = match k.gauge_hess(x) {
        Some(h) => h,
        None => hessian(&Gauge::new(k.clone()), x)?,
    };
    let len = grad.norm();
    let t = tangent_basis(&(grad / len));
    let shape = t.transpose() * h * &t;
    let det = if shape.nrows() == 0 { 1.0 } else { shape.determinant() };
    Ok(det / len.powi(k.dim() as i32 - 1))
}

/// Boundary data at `r(u) u`.
pub fn boundary_point(k: &Body, u: &[f64]) -> Result<BoundaryPoint> {
    let r = k.radial(u);
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("radial function {r} at {u:?}")));
    }
    let x: Vec<f64> = u.iter().map(|v| r * v).collect();
    let g = gauge_gradient(k, &x)?;
    let normal = &g / g.norm();
    let support_number = normal.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
    let curvature = direct_curvature(k, &x, &g)?.max(0.0);
    Ok(BoundaryPoint {
        surface_density: r.powi(k.dim() as i32) / support_number,
        x,
        normal: normal.as_slice().to_vec(),
        curvature,
        support_number,
    })
}

/// Gauss curvature at a boundary point (`x` is rescaled onto `∂K`).
pub fn curvature(k: &Body, x: &[f64], method: CurvatureMethod) -> Result<f64> {
    let n = k.dim();
    let g0 = k.gauge(x);
    if !(g0 > 0.0) {
        return Err(Error::InvalidArgument("curvature at the origin".into()));
    }
    let x: Vec<f64> = x.iter().map(|v| v / g0).collect();
    let grad = gauge_gradient(k, &x)?;
    let kappa = match method {
        CurvatureMethod::Direct => direct_curvature(k, &x, &grad)?,
        CurvatureMethod::Hesse => {
            let normal = &grad / grad.norm();
            let xn: f64 = normal.iter().zip(&x).map(|(a, b)| a * b).sum();
            let h = fd_hessian(&GaugeSquared::new(k.clone()), &x, fd_step(&x))?;
            h.determinant() * xn.powi(n as i32 + 1)
        }
    };
    if !(kappa >= KAPPA_TOL) {
        return Err(Error::FlatPoint { point: x, curvature: kappa });
    }
    Ok(kappa)
}

fn integrate_directions<F>(k: &Body, h: F, spec: &IntegrationSpec) -> Result<IntegrationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    match k.dim() {
        2 => integrate_circle_with_breakpoints(h, &k.circle_breaks(), spec),
        n => integrate_sphere(h, n, spec),
    }
}

/// `|K| = (1/n) ∫_{S^{n-1}} r(u)^n du`.
pub fn volume_by_quadrature(k: &Body, spec: &IntegrationSpec) -> Result<IntegrationResult> {
    let n = k.dim();
    let r = integrate_directions(k, |u| k.radial(u).powi(n as i32), spec)?;
    Ok(r.scaled(1.0 / n as f64))
}

/// `|K|` in closed form when known, by quadrature otherwise.
pub fn volume(k: &Body, spec: &IntegrationSpec) -> Result<IntegrationResult> {
    match k.volume() {
        Some(v) => Ok(IntegrationResult::exact(v)),
        None => volume_by_quadrature(k, spec),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BodyAsp {
    pub p: f64,
    pub value: IntegrationResult,
    /// `μ_K(∂K)`.
    pub surface_area: IntegrationResult,
    /// Share of `μ_K` where the curvature is below [`KAPPA_TOL`].
    pub flat_fraction: f64,
}

/// `as_p(K) = ∫_{∂K} κ^{p/(n+p)} / <x,N>^{n(p-1)/(n+p)} dμ_K` through the
/// radial map `u -> r(u) u`.
///
/// For `p < 0` a boundary with flat parts of positive measure gives `+inf`.
pub fn as_p_body(k: &Body, p: f64, spec: &IntegrationSpec) -> Result<BodyAsp> {
    let n = k.dim() as f64;
    if !p.is_finite() || (p + n).abs() < 1e-12 {
        return Err(Error::UnsupportedExponent { p });
    }
    let e_kappa = p / (n + p);
    let e_support = -n * (p - 1.0) / (n + p);
    let point = |u: &[f64]| boundary_point(k, u).ok();
    let value = integrate_directions(
        k,
        |u| match point(u) {
            None => f64::NAN,
            Some(b) if b.curvature < KAPPA_TOL && e_kappa < 0.0 => 0.0,
            Some(b) => {
                let kappa = if b.curvature < KAPPA_TOL { 0.0 } else { b.curvature };
                kappa.powf(e_kappa) * b.support_number.powf(e_support) * b.surface_density
            }
        },
        spec,
    )?;
    let surface_area = integrate_directions(k, |u| point(u).map_or(f64::NAN, |b| b.surface_density), spec)?;
    let flat = if k.curvature_positive_ae() {
        0.0
    } else {
        integrate_directions(
            k,
            |u| match point(u) {
                None => f64::NAN,
                Some(b) if b.curvature < KAPPA_TOL => b.surface_density,
                Some(_) => 0.0,
            },
            spec,
        )?
        .value
    };
    let flat_fraction = (flat / surface_area.value).clamp(0.0, 1.0);
    let value = if p < 0.0 && flat_fraction > 0.0 {
        IntegrationResult {
            value: f64::INFINITY,
            ..value
        }
    } else {
        value
    };
    Ok(BodyAsp {
        p,
        value,
        surface_area,
        flat_fraction,
    })
}
