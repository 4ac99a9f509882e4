use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::bbox::oracle_box;
use super::{dot, dvec, BoundingBox, ConvexFunction, DomainStatus, Oracle, QuadraticForm};
use crate::error::{Error, Result};
use crate::quadrature::DEFAULT_TRUNCATION_LEVEL;

/// Constant function. Only meaningful under a [`Restricted`] domain, so its
/// own bounding box is a large placeholder cube.
#[derive(Debug, Clone)]
pub struct Constant {
    n: usize,
    c: f64,
    bbox: BoundingBox,
}

impl Constant {
    pub fn new(n: usize, c: f64) -> Self {
        Self {
            n,
            c,
            bbox: BoundingBox::cube(n, 1e6),
        }
    }
}

impl ConvexFunction for Constant {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, _x: &[f64]) -> f64 {
        self.c
    }
    fn grad(&self, _x: &[f64]) -> Option<DVector<f64>> {
        Some(DVector::zeros(self.n))
    }
    fn hess(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::zeros(self.n, self.n))
    }
    fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }
    fn is_even(&self) -> bool {
        true
    }
    fn label(&self) -> String {
        format!("constant{}", self.n)
    }
}

/// `Σ |x_i|^p / p + offset` with `p > 1`; conjugate exponent `p/(p-1)`.
#[derive(Debug, Clone)]
pub struct PowerFunction {
    n: usize,
    p: f64,
    offset: f64,
    bbox: BoundingBox,
}

impl PowerFunction {
    pub fn new(n: usize, p: f64, offset: f64) -> Result<Self> {
        if !(p > 1.0) || n == 0 {
            return Err(Error::UnsupportedExponent { p });
        }
        let r = (p * DEFAULT_TRUNCATION_LEVEL).powf(1.0 / p);
        Ok(Self {
            n,
            p,
            offset,
            bbox: BoundingBox::cube(n, r),
        })
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }
}

impl ConvexFunction for PowerFunction {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| v.abs().powf(self.p)).sum::<f64>() / self.p + self.offset
    }
    fn grad(&self, x: &[f64]) -> Option<DVector<f64>> {
        Some(DVector::from_iterator(
            self.n,
            x.iter().map(|v| v.signum() * v.abs().powf(self.p - 1.0)),
        ))
    }
    fn hess(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        if self.p < 2.0 && x.iter().any(|v| *v == 0.0) {
            return None;
        }
        let d = DVector::from_iterator(self.n, x.iter().map(|v| (self.p - 1.0) * v.abs().powf(self.p - 2.0)));
        Some(DMatrix::from_diagonal(&d))
    }
    fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }
    fn legendre_dual(&self) -> Option<Oracle> {
        let q = self.p / (self.p - 1.0);
        Some(Arc::new(PowerFunction::new(self.n, q, -self.offset).ok()?))
    }
    fn is_even(&self) -> bool {
        true
    }
    fn label(&self) -> String {
        format!("power{}-p{}", self.n, self.p)
    }
}

/// `inner` on the polyhedron `{<a_k, x> <= b_k}`, `+inf` outside.
#[derive(Debug, Clone)]
pub struct Restricted {
    inner: Oracle,
    halfspaces: Vec<(Vec<f64>, f64)>,
    bbox: BoundingBox,
}

impl Restricted {
    pub fn new(inner: Oracle, halfspaces: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let n = inner.dim();
        if halfspaces.iter().any(|(a, _)| a.len() != n) {
            return Err(Error::InvalidArgument("halfspace dimension mismatch".into()));
        }
        let mut r = Self {
            bbox: inner.bounding_box().clone(),
            inner,
            halfspaces,
        };
        r.bbox = oracle_box(&r, DEFAULT_TRUNCATION_LEVEL)?;
        Ok(r)
    }

    /// `inner` restricted to an axis box.
    pub fn to_box(inner: Oracle, lo: &[f64], hi: &[f64]) -> Result<Self> {
        let n = inner.dim();
        let mut hs = Vec::new();
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            hs.push((e.clone(), hi[i]));
            e[i] = -1.0;
            hs.push((e, -lo[i]));
        }
        Self::new(inner, hs)
    }

    fn slack(&self, x: &[f64]) -> f64 {
        self.halfspaces
            .iter()
            .map(|(a, b)| b - dot(a, x))
            .fold(f64::INFINITY, f64::min)
    }
}

impl ConvexFunction for Restricted {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        if self.slack(x) < 0.0 {
            f64::INFINITY
        } else {
            self.inner.eval(x)
        }
    }
    fn grad(&self, x: &[f64]) -> Option<DVector<f64>> {
        if self.slack(x) > 0.0 {
            self.inner.grad(x)
        } else {
            None
        }
    }
    fn hess(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        if self.slack(x) > 0.0 {
            self.inner.hess(x)
        } else {
            None
        }
    }
    fn domain(&self, x: &[f64]) -> DomainStatus {
        let s = self.slack(x);
        if s < 0.0 {
            DomainStatus::Outside
        } else if s <= 1e-12 {
            DomainStatus::Boundary
        } else {
            self.inner.domain(x)
        }
    }
    fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }
    fn label(&self) -> String {
        format!("{}|restricted", self.inner.label())
    }
}

/// `max(psi1, psi2)`.
#[derive(Debug, Clone)]
pub struct PointwiseMax {
    a: Oracle,
    b: Oracle,
    bbox: BoundingBox,
}

/// `min(psi1, psi2)`; convex only for compatible pairs, see
/// `asa_log::valuation_check`.
#[derive(Debug, Clone)]
pub struct PointwiseMin {
    a: Oracle,
    b: Oracle,
    bbox: BoundingBox,
}

impl PointwiseMax {
    pub fn new(a: Oracle, b: Oracle) -> Self {
        assert_eq!(a.dim(), b.dim(), "pointwise max of different dimensions");
        let bbox = a.bounding_box().union(b.bounding_box());
        Self { a, b, bbox }
    }
    fn active(&self, x: &[f64]) -> &Oracle {
        if self.a.eval(x) >= self.b.eval(x) {
            &self.a
        } else {
            &self.b
        }
    }
}

impl PointwiseMin {
    pub fn new(a: Oracle, b: Oracle) -> Self {
        assert_eq!(a.dim(), b.dim(), "pointwise min of different dimensions");
        let bbox = a.bounding_box().union(b.bounding_box());
        Self { a, b, bbox }
    }
    fn active(&self, x: &[f64]) -> &Oracle {
        if self.a.eval(x) <= self.b.eval(x) {
            &self.a
        } else {
            &self.b
        }
    }
}

macro_rules! pointwise_impl {
    ($t:ty, $op:ident, $name:literal) => {
        impl ConvexFunction for $t {
            fn dim(&self) -> usize {
                self.a.dim()
            }
            fn eval(&self, x: &[f64]) -> f64 {
                self.a.eval(x).$op(self.b.eval(x))
            }
            fn grad(&self, x: &[f64]) -> Option<DVector<f64>> {
                self.active(x).grad(x)
            }
            fn hess(&self, x: &[f64]) -> Option<DMatrix<f64>> {
                self.active(x).hess(x)
            }
            fn bounding_box(&self) -> &BoundingBox {
                &self.bbox
            }
            fn is_even(&self) -> bool {
                self.a.is_even() && self.b.is_even()
            }
            fn label(&self) -> String {
                format!("{}({},{})", $name, self.a.label(), self.b.label())
            }
        }
    };
}

pointwise_impl!(PointwiseMax, max, "max");
pointwise_impl!(PointwiseMin, min, "min");

/// `eps * log Σ exp((<a_k, x> + b_k)/eps)`, a smoothed max of affine maps.
#[derive(Debug, Clone)]
pub struct SmoothedMax {
    normals: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    eps: f64,
    bbox: BoundingBox,
}

impl SmoothedMax {
    pub fn new(normals: Vec<Vec<f64>>, offsets: Vec<f64>, eps: f64) -> Result<Self> {
        if normals.is_empty() || normals.len() != offsets.len() || !(eps > 0.0) {
            return Err(Error::InvalidArgument("smoothed max needs matching normals/offsets and eps > 0".into()));
        }
        let n = normals[0].len();
        let mut f = Self {
            normals,
            offsets,
            eps,
            bbox: BoundingBox::cube(n, 1.0),
        };
        f.bbox = oracle_box(&f, DEFAULT_TRUNCATION_LEVEL)?;
        Ok(f)
    }

    /// The `2n` affine maps `±x_i`, smoothing `max_i |x_i|`.
    pub fn cube_gauge(n: usize, eps: f64) -> Self {
        let mut normals = Vec::new();
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[i] = s;
                normals.push(e);
            }
        }
        Self::new(normals, vec![0.0; 2 * n], eps).expect("cube gauge is coercive")
    }

    fn weights(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let t: Vec<f64> = self
            .normals
            .iter()
            .zip(&self.offsets)
            .map(|(a, b)| (dot(a, x) + b) / self.eps)
            .collect();
        let m = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = t.iter().map(|v| (v - m).exp()).collect();
        let s: f64 = w.iter().sum();
        (self.eps * (m + s.ln()), w.iter().map(|v| v / s).collect())
    }
}

impl ConvexFunction for SmoothedMax {
    fn dim(&self) -> usize {
        self.normals[0].len()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        self.weights(x).0
    }
    fn grad(&self, x: &[f64]) -> Option<DVector<f64>> {
        let (_, p) = self.weights(x);
        let mut g = DVector::zeros(self.dim());
        for (a, pk) in self.normals.iter().zip(&p) {
            g += *pk * dvec(a);
        }
        Some(g)
    }
    fn hess(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let (_, p) = self.weights(x);
        let n = self.dim();
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        for (a, pk) in self.normals.iter().zip(&p) {
            let a = dvec(a);
            g += *pk * &a;
            h += *pk * &a * a.transpose();
        }
        Some((h - &g * g.transpose()) / self.eps)
    }
    fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }
    fn label(&self) -> String {
        format!("smoothmax{}-eps{}", self.dim(), self.eps)
    }
}

/// `base(x) + w·(σ(<d,x> - b))₊²` with side `σ = ±1`.
///
/// C¹ but not C²: the Hessian jumps across the hyperplane `<d,x> = b`.
#[derive(Debug, Clone)]
pub struct HingeSquared {
    base: QuadraticForm,
    weight: f64,
    direction: Vec<f64>,
    bias: f64,
    side: f64,
    bbox: BoundingBox,
}

impl HingeSquared {
    pub fn new(base: QuadraticForm, weight: f64, direction: Vec<f64>, bias: f64, positive_side: bool) -> Result<Self> {
        if direction.len() != base.dim() || !(weight >= 0.0) {
            return Err(Error::InvalidArgument("hinge needs a matching direction and weight >= 0".into()));
        }
        let mut h = Self {
            bbox: base.level_box(DEFAULT_TRUNCATION_LEVEL),
            base,
            weight,
            direction,
            bias,
            side: if positive_side { 1.0 } else { -1.0 },
        };
        let zero = vec![0.0; h.base.dim()];
        let lift = h.eval(&zero) - h.base.eval_vec(&zero);
        h.bbox = h.base.level_box(DEFAULT_TRUNCATION_LEVEL + lift);
        Ok(h)
    }

    fn slack(&self, x: &[f64]) -> f64 {
        self.side * (dot(&self.direction, x) - self.bias)
    }
}

impl ConvexFunction for HingeSquared {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        let t = self.slack(x).max(0.0);
        self.base.eval_vec(x) + self.weight * t * t
    }
    fn grad(&self, x: &[f64]) -> Option<DVector<f64>> {
        let t = self.slack(x).max(0.0);
        let g = self.base.grad(x)?;
        Some(g + dvec(&self.direction) * (2.0 * self.weight * self.side * t))
    }
    fn hess(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let h = self.base.hess(x)?;
        if self.slack(x) > 0.0 {
            let d = dvec(&self.direction);
            Some(h + (&d * d.transpose()) * (2.0 * self.weight))
        } else {
            Some(h)
        }
    }
    fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }
    fn label(&self) -> String {
        format!("hinge{}{}", self.base.dim(), if self.side > 0.0 { "+" } else { "-" })
    }
}
