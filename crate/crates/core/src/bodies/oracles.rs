//! Convex-function views of a body: gauge, half squared gauge, indicator.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::Body;
use crate::convex_core::{BoundingBox, ConvexFunction, DomainStatus, Oracle, QuadraticForm};
use crate::quadrature::DEFAULT_TRUNCATION_LEVEL;

/// `[-R h(-e_i), R h(e_i)]`, the box of `R K`.
fn body_box(k: &Body, radius: f64) -> BoundingBox {
    let n = k.dim();
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        hi[i] = radius * k.support(&e);
        e[i] = -1.0;
        lo[i] = -radius * k.support(&e);
    }
    BoundingBox::new(lo, hi)
}

/// `x -> ||x||_K`; the dual is the indicator of `K°`.
#[derive(Debug, Clone)]
pub struct Gauge {
    body: Body,
    bbox: BoundingBox,
}

impl Gauge {
    pub fn new(body: Body) -> Self {
        let bbox = body_box(&body, DEFAULT_TRUNCATION_LEVEL);
        Self { body, bbox }
    }
}

impl ConvexFunction for Gauge {
    fn dim(&self) -> usize {
        self.body.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        self.body.gauge(x)
    }
    fn grad(&self, x: &[f64]) -> Option<DVector<f64>> {
        self.body.gauge_grad(x)
    }
    fn hess(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        self.body.gauge_hess(x)
    }
    fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }
    fn legendre_dual(&self) -> Option<Oracle> {
        Some(Arc::new(Indicator::new(self.body.polar().ok()?)))
    }
    fn is_even(&self) -> bool {
        self.body.is_even()
    }
    fn label(&self) -> String {
        format!("gauge[{}]", self.body.label())
    }
}

/// `x -> ||x||_K^2 / 2`; self-dual up to polarity.
#[derive(Debug, Clone)]
pub struct GaugeSquared {
    body: Body,
    bbox: BoundingBox,
}

impl GaugeSquared {
    pub fn new(body: Body) -> Self {
        let bbox = body_box(&body, (2.0 * DEFAULT_TRUNCATION_LEVEL).sqrt());
        Self { body, bbox }
    }

    pub fn body(&self) -> &Body {
        &self.body
    }
}

impl ConvexFunction for GaugeSquared {
    fn dim(&self) -> usize {
        self.body.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        let g = self.body.gauge(x);
        0.5 * g * g
    }
    fn grad(&self, x: &[f64]) -> Option<DVector<f64>> {
        let g = self.body.gauge(x);
        if g == 0.0 {
            return Some(DVector::zeros(self.dim()));
        }
        self.body.gauge_grad(x).map(|d| d * g)
    }
    fn hess(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        if let Some(m) = self.body.ellipsoid_matrix() {
            return Some(m);
        }
        let g = self.body.gauge(x);
        if g == 0.0 {
            return None;
        }
        let d = self.body.gauge_grad(x)?;
        let h = self.body.gauge_hess(x)?;
        Some(&d * d.transpose() + h * g)
    }
    fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }
    fn legendre_dual(&self) -> Option<Oracle> {
        Some(Arc::new(GaugeSquared::new(self.body.polar().ok()?)))
    }
    fn as_quadratic(&self) -> Option<QuadraticForm> {
        let m = self.body.ellipsoid_matrix()?;
        let n = m.nrows();
        QuadraticForm::new(m, DVector::zeros(n), 0.0).ok()
    }
    fn is_even(&self) -> bool {
        self.body.is_even()
    }
    fn label(&self) -> String {
        format!("gauge2[{}]", self.body.label())
    }
}

/// `0` on `K`, `+inf` outside; the dual is the support function `h_K`.
#[derive(Debug, Clone)]
pub struct Indicator {
    body: Body,
    bbox: BoundingBox,
}

impl Indicator {
    pub fn new(body: Body) -> Self {
        let bbox = body_box(&body, 1.0);
        Self { body, bbox }
    }
}

impl ConvexFunction for Indicator {
    fn dim(&self) -> usize {
        self.body.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        if self.body.gauge(x) <= 1.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn grad(&self, x: &[f64]) -> Option<DVector<f64>> {
        (self.domain(x) == DomainStatus::Interior).then(|| DVector::zeros(self.dim()))
    }
    fn hess(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        (self.domain(x) == DomainStatus::Interior).then(|| DMatrix::zeros(self.dim(), self.dim()))
    }
    fn domain(&self, x: &[f64]) -> DomainStatus {
        let g = self.body.gauge(x);
        if g > 1.0 {
            DomainStatus::Outside
        } else if g >= 1.0 - 1e-12 {
            DomainStatus::Boundary
        } else {
            DomainStatus::Interior
        }
    }
    fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }
    fn legendre_dual(&self) -> Option<Oracle> {
        Some(Arc::new(Gauge::new(self.body.polar().ok()?)))
    }
    fn is_even(&self) -> bool {
        self.body.is_even()
    }
    fn label(&self) -> String {
        format!("indicator[{}]", self.body.label())
    }
}
