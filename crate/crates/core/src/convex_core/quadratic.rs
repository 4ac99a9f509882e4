use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{dvec, BoundingBox, ConvexFunction, Oracle};
use crate::error::{Error, Result};
use crate::quadrature::DEFAULT_TRUNCATION_LEVEL;

/// `psi(x) = <A(x - z), x - z>/2 + a` with `A` symmetric positive definite.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    a: DMatrix<f64>,
    center: DVector<f64>,
    offset: f64,
    a_inv: DMatrix<f64>,
    det: f64,
    bbox: BoundingBox,
}

impl QuadraticForm {
    pub fn new(a: DMatrix<f64>, center: DVector<f64>, offset: f64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || center.len() != n || n == 0 {
            return Err(Error::InvalidArgument("quadratic form shape mismatch".into()));
        }
        if (&a - a.transpose()).amax() > 1e-12 * a.amax().max(1.0) {
            return Err(Error::InvalidArgument("quadratic form matrix is not symmetric".into()));
        }
        let a = 0.5 * (&a + a.transpose());
        let det = a.determinant();
        let chol = a.clone().cholesky().ok_or(Error::SingularMatrix { det })?;
        let a_inv = chol.inverse();
        let a_inv = 0.5 * (&a_inv + a_inv.transpose());
        let mut q = Self {
            a,
            center,
            offset,
            a_inv,
            det,
            bbox: BoundingBox::cube(n, 1.0),
        };
        q.bbox = q.level_box(DEFAULT_TRUNCATION_LEVEL);
        Ok(q)
    }

    pub fn isotropic(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n), DVector::zeros(n), 0.0).expect("identity is positive definite")
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::new(DMatrix::from_diagonal(&dvec(diag)), DVector::zeros(n), 0.0)
    }

    pub fn with_center(&self, center: DVector<f64>) -> Self {
        Self::new(self.a.clone(), center, self.offset).expect("matrix already validated")
    }

    pub fn with_offset(&self, offset: f64) -> Self {
        Self::new(self.a.clone(), self.center.clone(), offset).expect("matrix already validated")
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.a_inv
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// Closed-form conjugate: matrix `A^{-1}`, center `-Az`, offset `-a - <Az, z>/2`.
    ///
    /// For `z = 0` this is `(A^{-1}, 0, -a)`.
    pub fn legendre(&self) -> QuadraticForm {
        let az = &self.a * &self.center;
        let offset = -self.offset - 0.5 * az.dot(&self.center);
        Self::new(self.a_inv.clone(), -az, offset).expect("inverse of SPD is SPD")
    }

    /// `∫ exp(-psi) = (2 pi)^{n/2} det(A)^{-1/2} e^{-a}`.
    pub fn gaussian_integral(&self) -> f64 {
        let n = self.dim() as f64;
        (2.0 * std::f64::consts::PI).powf(n / 2.0) * self.det.powf(-0.5) * (-self.offset).exp()
    }

    /// Smallest box around `{psi <= psi(0) + level}`.
    pub fn level_box(&self, level: f64) -> BoundingBox {
        let n = self.dim();
        let psi0 = self.eval(&vec![0.0; n]);
        let r2 = 2.0 * (psi0 - self.offset + level);
        let r = r2.max(0.0).sqrt();
        let lo = (0..n).map(|i| self.center[i] - r * self.a_inv[(i, i)].sqrt()).collect();
        let hi = (0..n).map(|i| self.center[i] + r * self.a_inv[(i, i)].sqrt()).collect();
        BoundingBox::new(lo, hi)
    }

    pub(crate) fn eval_vec(&self, x: &[f64]) -> f64 {
        let d = dvec(x) - &self.center;
        0.5 * d.dot(&(&self.a * &d)) + self.offset
    }
}

impl ConvexFunction for QuadraticForm {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.eval_vec(x)
    }

    fn grad(&self, x: &[f64]) -> Option<DVector<f64>> {
        Some(&self.a * (dvec(x) - &self.center))
    }

    fn hess(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        Some(self.a.clone())
    }

    fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }

    fn legendre_dual(&self) -> Option<Oracle> {
        Some(Arc::new(self.legendre()))
    }

    fn as_quadratic(&self) -> Option<QuadraticForm> {
        Some(self.clone())
    }

    fn is_even(&self) -> bool {
        self.center.iter().all(|c| *c == 0.0)
    }

    fn label(&self) -> String {
        let n = self.dim();
        let diag = (0..n).all(|i| (0..n).all(|j| i == j || self.a[(i, j)] == 0.0));
        if diag && (0..n).all(|i| self.a[(i, i)] == 1.0) && self.is_even() && self.offset == 0.0 {
            format!("euclidean{n}")
        } else {
            format!("quadratic{n}")
        }
    }
}
