use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::bbox::oracle_box;
use super::{dvec, BoundingBox, ConvexFunction, DomainStatus, Jet, Oracle, QuadraticForm};
use crate::error::{Error, Result};
use crate::quadrature::DEFAULT_TRUNCATION_LEVEL;

/// `psi_z(x) = psi(z + x)`.
#[derive(Debug, Clone)]
pub struct Translate {
    inner: Oracle,
    shift: Vec<f64>,
    bbox: BoundingBox,
}

/// `psi(x) - <v, x>`.
#[derive(Debug, Clone)]
pub struct Tilt {
    inner: Oracle,
    v: Vec<f64>,
    bbox: BoundingBox,
}

/// `psi(Ax)` for invertible `A`.
#[derive(Debug, Clone)]
pub struct ComposeLinear {
    inner: Oracle,
    a: DMatrix<f64>,
    det: f64,
    bbox: BoundingBox,
}

fn shifted(x: &[f64], z: &[f64]) -> Vec<f64> {
    x.iter().zip(z).map(|(a, b)| a + b).collect()
}

/// Translation. Nested translations collapse into one shift, so
/// translating by `z` and then by `-z` reproduces the original values exactly.
pub fn translate(psi: &Oracle, z: &[f64]) -> Oracle {
    assert_eq!(psi.dim(), z.len(), "shift dimension");
    if let Some(q) = psi.as_quadratic() {
        if q.center().iter().all(|c| *c == 0.0) && z.iter().all(|v| *v == 0.0) {
            return psi.clone();
        }
    }
    if let Some((inner, prev)) = psi.as_translate() {
        let total = shifted(prev, z);
        if total.iter().all(|v| *v == 0.0) {
            return inner.clone();
        }
        return Arc::new(Translate::build(inner.clone(), total));
    }
    Arc::new(Translate::build(psi.clone(), z.to_vec()))
}

/// Linear tilt `psi(x) - <v, x>`, the Legendre partner of translation.
pub fn tilt(psi: &Oracle, v: &[f64]) -> Oracle {
    if v.iter().all(|c| *c == 0.0) {
        return psi.clone();
    }
    Arc::new(Tilt::build(psi.clone(), v.to_vec()))
}

/// `psi ∘ A`.
pub fn compose_linear(psi: &Oracle, a: &DMatrix<f64>) -> Result<Oracle> {
    let n = psi.dim();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::InvalidArgument("linear map has the wrong shape".into()));
    }
    let det = a.determinant();
    if det.abs() < 1e-12 {
        return Err(Error::SingularMatrix { det });
    }
    if a == &DMatrix::identity(n, n) {
        return Ok(psi.clone());
    }
    let inv = a.clone().try_inverse().ok_or(Error::SingularMatrix { det })?;
    let corners = psi.bounding_box().corners();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for c in corners {
        let p = &inv * dvec(&c);
        for i in 0..n {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    Ok(Arc::new(ComposeLinear {
        inner: psi.clone(),
        a: a.clone(),
        det,
        bbox: BoundingBox::new(lo, hi),
    }))
}

fn searched_box(f: &dyn ConvexFunction, fallback: BoundingBox) -> BoundingBox {
    match oracle_box(f, DEFAULT_TRUNCATION_LEVEL) {
        Ok(b) => b.union(&fallback),
        Err(_) => fallback,
    }
}

impl Translate {
    fn build(inner: Oracle, shift: Vec<f64>) -> Self {
        let neg: Vec<f64> = shift.iter().map(|v| -v).collect();
        let base = inner.bounding_box().translated(&neg);
        let mut t = Self {
            inner,
            shift,
            bbox: base.clone(),
        };
        t.bbox = match t.as_quadratic() {
            Some(q) => q.level_box(DEFAULT_TRUNCATION_LEVEL),
            None => searched_box(&t, base),
        };
        t
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }
}

impl ConvexFunction for Translate {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        self.inner.eval(&shifted(x, &self.shift))
    }
    fn grad(&self, x: &[f64]) -> Option<DVector<f64>> {
        self.inner.grad(&shifted(x, &self.shift))
    }
    fn hess(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        self.inner.hess(&shifted(x, &self.shift))
    }
    fn jet(&self, x: &[f64]) -> Jet {
        self.inner.jet(&shifted(x, &self.shift))
    }
    fn domain(&self, x: &[f64]) -> DomainStatus {
        self.inner.domain(&shifted(x, &self.shift))
    }
    fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }
    fn legendre_dual(&self) -> Option<Oracle> {
        Some(tilt(&self.inner.legendre_dual()?, &self.shift))
    }
    fn as_quadratic(&self) -> Option<QuadraticForm> {
        let q = self.inner.as_quadratic()?;
        Some(q.with_center(q.center() - dvec(&self.shift)))
    }
    fn as_translate(&self) -> Option<(&Oracle, &[f64])> {
        Some((&self.inner, &self.shift))
    }
    fn label(&self) -> String {
        format!("{}+shift", self.inner.label())
    }
}

impl Tilt {
    fn build(inner: Oracle, v: Vec<f64>) -> Self {
        let base = inner.bounding_box().clone();
        let mut t = Self {
            inner,
            v,
            bbox: base.clone(),
        };
        t.bbox = match t.as_quadratic() {
            Some(q) => q.level_box(DEFAULT_TRUNCATION_LEVEL),
            None => searched_box(&t, base),
        };
        t
    }
}

impl ConvexFunction for Tilt {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        self.inner.eval(x) - super::dot(&self.v, x)
    }
    fn grad(&self, x: &[f64]) -> Option<DVector<f64>> {
        Some(self.inner.grad(x)? - dvec(&self.v))
    }
    fn hess(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        self.inner.hess(x)
    }
    fn jet(&self, x: &[f64]) -> Jet {
        let j = self.inner.jet(x);
        Jet {
            value: j.value - super::dot(&self.v, x),
            grad: j.grad.map(|g| g - dvec(&self.v)),
            hess: j.hess,
        }
    }
    fn domain(&self, x: &[f64]) -> DomainStatus {
        self.inner.domain(x)
    }
    fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }
    fn legendre_dual(&self) -> Option<Oracle> {
        Some(translate(&self.inner.legendre_dual()?, &self.v))
    }
    fn as_quadratic(&self) -> Option<QuadraticForm> {
        let q = self.inner.as_quadratic()?;
        let v = dvec(&self.v);
        let shift = q.inverse() * &v;
        let offset = q.offset() - v.dot(q.center()) - 0.5 * shift.dot(&v);
        QuadraticForm::new(q.matrix().clone(), q.center() + shift, offset).ok()
    }
    fn label(&self) -> String {
        format!("{}-tilt", self.inner.label())
    }
}

impl ComposeLinear {
    fn map(&self, x: &[f64]) -> Vec<f64> {
        (&self.a * dvec(x)).as_slice().to_vec()
    }

    pub fn det(&self) -> f64 {
        self.det
    }
}

impl ConvexFunction for ComposeLinear {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        self.inner.eval(&self.map(x))
    }
    fn grad(&self, x: &[f64]) -> Option<DVector<f64>> {
        Some(self.a.transpose() * self.inner.grad(&self.map(x))?)
    }
    fn hess(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        Some(self.a.transpose() * self.inner.hess(&self.map(x))? * &self.a)
    }
    fn jet(&self, x: &[f64]) -> Jet {
        let j = self.inner.jet(&self.map(x));
        Jet {
            value: j.value,
            grad: j.grad.map(|g| self.a.transpose() * g),
            hess: j.hess.map(|h| self.a.transpose() * h * &self.a),
        }
    }
    fn domain(&self, x: &[f64]) -> DomainStatus {
        self.inner.domain(&self.map(x))
    }
    fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }
    fn legendre_dual(&self) -> Option<Oracle> {
        let dual = self.inner.legendre_dual()?;
        let inv_t = self.a.clone().try_inverse()?.transpose();
        compose_linear(&dual, &inv_t).ok()
    }
    fn as_quadratic(&self) -> Option<QuadraticForm> {
        let q = self.inner.as_quadratic()?;
        let inv = self.a.clone().try_inverse()?;
        let m = self.a.transpose() * q.matrix() * &self.a;
        QuadraticForm::new(0.5 * (&m + m.transpose()), inv * q.center(), q.offset()).ok()
    }
    fn is_even(&self) -> bool {
        self.inner.is_even()
    }
    fn label(&self) -> String {
        format!("{}∘A", self.inner.label())
    }
}
