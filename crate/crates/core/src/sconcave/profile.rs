//! Convex functions attached to concrete s-concave profiles.

use nalgebra::{DMatrix, DVector};

use crate::convex_core::{dvec, BoundingBox, ConvexFunction, DomainStatus, Jet, Oracle};
use crate::error::{Error, Result};

/// `ψ = (1 - f^s)/s` for `f = c (1 - s q)_+^{α/s}`, `q(x) = <Mx, x>/2`.
///
/// `0 < α <= 1` keeps `f^s = c^s (1 - s q)^α` concave; `α = 1/2` with
/// `M = 2AᵀA` is the equality family of the s-log-Sobolev inequality.
#[derive(Debug, Clone)]
pub struct SProfilePsi {
    s: f64,
    alpha: f64,
    c: f64,
    m: DMatrix<f64>,
    bbox: BoundingBox,
}

impl SProfilePsi {
    pub fn new(s: f64, m: DMatrix<f64>, alpha: f64, c: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::UnsupportedS { s, reason: "s must be positive" });
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!("profile exponent alpha = {alpha} outside (0, 1]")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("profile scale c = {c} must be positive")));
        }
        if !m.is_square() || m.clone().cholesky().is_none() {
            return Err(Error::InvalidArgument("profile matrix must be symmetric positive definite".into()));
        }
        // S_f = {<Mx, x> < 2/s}; its box has half-widths sqrt(2 (M^{-1})_ii / s).
        let inv = m.clone().try_inverse().ok_or(Error::SingularMatrix { det: m.determinant() })?;
        let half: Vec<f64> = (0..m.nrows()).map(|i| (2.0 * inv[(i, i)] / s).sqrt()).collect();
        let bbox = BoundingBox::new(half.iter().map(|h| -h).collect(), half);
        Ok(Self { s, alpha, c, m, bbox })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn scale(&self) -> f64 {
        self.c
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// `1 - s q(x)` and `Mx`.
    fn base(&self, x: &[f64]) -> (f64, DVector<f64>) {
        let mx = &self.m * dvec(x);
        let q = 0.5 * mx.dot(&dvec(x));
        (1.0 - self.s * q, mx)
    }
}

impl ConvexFunction for SProfilePsi {
    fn dim(&self) -> usize {
        self.m.nrows()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        let (u, _) = self.base(x);
        if u <= 0.0 {
            return f64::INFINITY;
        }
        (1.0 - self.c.powf(self.s) * u.powf(self.alpha)) / self.s
    }
    fn grad(&self, x: &[f64]) -> Option<DVector<f64>> {
        let (u, mx) = self.base(x);
        (u > 0.0).then(|| mx * (self.c.powf(self.s) * self.alpha * u.powf(self.alpha - 1.0)))
    }
    fn hess(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let (u, mx) = self.base(x);
        if u <= 0.0 {
            return None;
        }
        let k = self.c.powf(self.s) * self.alpha * u.powf(self.alpha - 2.0);
        Some((&self.m * u + &mx * mx.transpose() * (self.s * (1.0 - self.alpha))) * k)
    }
    fn jet(&self, x: &[f64]) -> Jet {
        let (u, mx) = self.base(x);
        if u <= 0.0 {
            return Jet {
                value: f64::INFINITY,
                grad: None,
                hess: None,
            };
        }
        let cs = self.c.powf(self.s);
        let ua = u.powf(self.alpha);
        let k = cs * self.alpha * ua / (u * u);
        Jet {
            value: (1.0 - cs * ua) / self.s,
            grad: Some(&mx * (k * u)),
            hess: Some((&self.m * u + &mx * mx.transpose() * (self.s * (1.0 - self.alpha))) * k),
        }
    }
    fn domain(&self, x: &[f64]) -> DomainStatus {
        let (u, _) = self.base(x);
        if u > 0.0 {
            DomainStatus::Interior
        } else if u == 0.0 {
            DomainStatus::Boundary
        } else {
            DomainStatus::Outside
        }
    }
    fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }
    fn is_even(&self) -> bool {
        true
    }
    fn label(&self) -> String {
        format!("s-profile[s={},alpha={},c={:.6}]", self.s, self.alpha, self.c)
    }
}

/// `ψ` of `t f` given `ψ` of `f`: `(1 - t^s (1 - sψ))/s`.
#[derive(Debug, Clone)]
pub struct RescaledPsi {
    inner: Oracle,
    s: f64,
    /// `t^s`.
    k: f64,
}

impl RescaledPsi {
    pub fn new(inner: Oracle, s: f64, t: f64) -> Self {
        Self {
            inner,
            s,
            k: t.powf(s),
        }
    }
}

impl ConvexFunction for RescaledPsi {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        let v = self.inner.eval(x);
        if !v.is_finite() {
            return f64::INFINITY;
        }
        (1.0 - self.k * (1.0 - self.s * v)) / self.s
    }
    fn grad(&self, x: &[f64]) -> Option<DVector<f64>> {
        self.inner.grad(x).map(|g| g * self.k)
    }
    fn hess(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        self.inner.hess(x).map(|h| h * self.k)
    }
    fn jet(&self, x: &[f64]) -> Jet {
        let j = self.inner.jet(x);
        Jet {
            value: if j.value.is_finite() {
                (1.0 - self.k * (1.0 - self.s * j.value)) / self.s
            } else {
                f64::INFINITY
            },
            grad: j.grad.map(|g| g * self.k),
            hess: j.hess.map(|h| h * self.k),
        }
    }
    fn domain(&self, x: &[f64]) -> DomainStatus {
        self.inner.domain(x)
    }
    fn bounding_box(&self) -> &BoundingBox {
        self.inner.bounding_box()
    }
    fn is_even(&self) -> bool {
        self.inner.is_even()
    }
    fn label(&self) -> String {
        format!("{}x{:.6}", self.inner.label(), self.k.powf(1.0 / self.s))
    }
}
