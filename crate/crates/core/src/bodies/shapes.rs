use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::gamma;

use super::{ball_volume, Body, ConvexBody};
use crate::convex_core::{dot, dvec};
use crate::error::{Error, Result};

/// `{x : <Mx, x> <= 1}` with `M` positive definite.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    m: DMatrix<f64>,
    m_inv: DMatrix<f64>,
    det: f64,
}

impl Ellipsoid {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n == 0 || m.ncols() != n {
            return Err(Error::InvalidArgument("ellipsoid matrix must be square".into()));
        }
        if (&m - m.transpose()).amax() > 1e-12 * m.amax().max(1.0) {
            return Err(Error::InvalidArgument("ellipsoid matrix is not symmetric".into()));
        }
        let m = 0.5 * (&m + m.transpose());
        let det = m.determinant();
        let chol = m.clone().cholesky().ok_or(Error::SingularMatrix { det })?;
        let m_inv = chol.inverse();
        let m_inv = 0.5 * (&m_inv + m_inv.transpose());
        Ok(Self { m, m_inv, det })
    }

    /// Euclidean unit ball `B_2^n`.
    pub fn ball(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n)).expect("identity is positive definite")
    }

    /// Axis-aligned ellipsoid with the given semi-axes.
    pub fn axes(semi: &[f64]) -> Result<Self> {
        if semi.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::InvalidArgument(format!("semi-axes {semi:?}")));
        }
        let d: Vec<f64> = semi.iter().map(|a| 1.0 / (a * a)).collect();
        Self::new(DMatrix::from_diagonal(&dvec(&d)))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    fn is_ball(&self) -> bool {
        (&self.m - DMatrix::<f64>::identity(self.m.nrows(), self.m.nrows())).amax() == 0.0
    }
}

impl ConvexBody for Ellipsoid {
    fn dim(&self) -> usize {
        self.m.nrows()
    }
    fn gauge(&self, x: &[f64]) -> f64 {
        let v = dvec(x);
        v.dot(&(&self.m * &v)).max(0.0).sqrt()
    }
    fn support(&self, y: &[f64]) -> f64 {
        let v = dvec(y);
        v.dot(&(&self.m_inv * &v)).max(0.0).sqrt()
    }
    fn gauge_grad(&self, x: &[f64]) -> Option<DVector<f64>> {
        let g = self.gauge(x);
        (g > 0.0).then(|| &self.m * dvec(x) / g)
    }
    fn gauge_hess(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let g = self.gauge(x);
        if !(g > 0.0) {
            return None;
        }
        let mx = &self.m * dvec(x);
        Some(&self.m / g - &mx * mx.transpose() / (g * g * g))
    }
    fn polar(&self) -> Result<Body> {
        Ok(Arc::new(Ellipsoid::new(self.m_inv.clone())?))
    }
    fn volume(&self) -> Option<f64> {
        Some(ball_volume(self.dim()) / self.det.sqrt())
    }
    fn ellipsoid_matrix(&self) -> Option<DMatrix<f64>> {
        Some(self.m.clone())
    }
    fn curvature_positive_ae(&self) -> bool {
        true
    }
    fn is_even(&self) -> bool {
        true
    }
    fn label(&self) -> String {
        if self.is_ball() {
            format!("ball{}", self.dim())
        } else {
            format!("ellipsoid{}", self.dim())
        }
    }
}

/// Unit ball of the `l_q` norm, `1 <= q <= inf`.
#[derive(Debug, Clone)]
pub struct PBall {
    n: usize,
    q: f64,
}

impl PBall {
    pub fn new(n: usize, q: f64) -> Result<Self> {
        if n == 0 || !(q >= 1.0) {
            return Err(Error::InvalidArgument(format!("l_q ball with n = {n}, q = {q}")));
        }
        Ok(Self { n, q })
    }

    pub fn exponent(&self) -> f64 {
        self.q
    }

    fn conjugate(&self) -> f64 {
        if self.q == 1.0 {
            f64::INFINITY
        } else if self.q.is_infinite() {
            1.0
        } else {
            self.q / (self.q - 1.0)
        }
    }
}

fn lq_norm(x: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        x.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else if q == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else {
        // Scale first so large q does not overflow.
        let m = x.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        if m == 0.0 {
            return 0.0;
        }
        m * x.iter().map(|v| (v.abs() / m).powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

impl ConvexBody for PBall {
    fn dim(&self) -> usize {
        self.n
    }
    fn gauge(&self, x: &[f64]) -> f64 {
        lq_norm(x, self.q)
    }
    fn support(&self, y: &[f64]) -> f64 {
        lq_norm(y, self.conjugate())
    }
    fn gauge_grad(&self, x: &[f64]) -> Option<DVector<f64>> {
        let g = self.gauge(x);
        if !(g > 0.0) {
            return None;
        }
        let q = self.q;
        if q == 1.0 {
            if x.iter().any(|v| *v == 0.0) {
                return None;
            }
            return Some(DVector::from_iterator(self.n, x.iter().map(|v| v.signum())));
        }
        if q.is_infinite() {
            let mut top = 0;
            for i in 1..self.n {
                if x[i].abs() > x[top].abs() {
                    top = i;
                }
            }
            if (0..self.n).any(|i| i != top && x[i].abs() == x[top].abs()) {
                return None;
            }
            let mut d = DVector::zeros(self.n);
            d[top] = x[top].signum();
            return Some(d);
        }
        Some(DVector::from_iterator(
            self.n,
            x.iter().map(|v| v.signum() * (v.abs() / g).powf(q - 1.0)),
        ))
    }
    fn gauge_hess(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let q = self.q;
        let d = self.gauge_grad(x)?;
        if q == 1.0 || q.is_infinite() {
            return Some(DMatrix::zeros(self.n, self.n));
        }
        if q < 2.0 && x.iter().any(|v| *v == 0.0) {
            return None;
        }
        let g = self.gauge(x);
        // (q-1)/g [diag(|x_i/g|^{q-2}) - d d^T]
        let mut h = -&d * d.transpose();
        for i in 0..self.n {
            h[(i, i)] += (x[i].abs() / g).powf(q - 2.0);
        }
        Some(h * ((q - 1.0) / g))
    }
    fn polar(&self) -> Result<Body> {
        Ok(Arc::new(PBall::new(self.n, self.conjugate())?))
    }
    fn volume(&self) -> Option<f64> {
        let n = self.n as f64;
        if self.q.is_infinite() {
            return Some(2f64.powf(n));
        }
        Some((2.0 * gamma(1.0 + 1.0 / self.q)).powf(n) / gamma(1.0 + n / self.q))
    }
    fn ellipsoid_matrix(&self) -> Option<DMatrix<f64>> {
        (self.q == 2.0).then(|| DMatrix::identity(self.n, self.n))
    }
    fn curvature_positive_ae(&self) -> bool {
        self.q > 1.0 && self.q.is_finite()
    }
    fn circle_breaks(&self) -> Vec<f64> {
        // Kinks of q = inf sit on the diagonals; every other q != 2 has
        // zero or infinite curvature on the axes.
        if self.q.is_infinite() {
            (0..4).map(|k| PI / 4.0 + k as f64 * PI / 2.0).collect()
        } else if self.q == 2.0 {
            Vec::new()
        } else {
            (0..4).map(|k| k as f64 * PI / 2.0).collect()
        }
    }
    fn is_even(&self) -> bool {
        true
    }
    fn label(&self) -> String {
        format!("l{}ball{}", self.q, self.n)
    }
}

/// Polytope `{<a_k, x> <= 1}` with the origin inside, stored with both its
/// vertices and its facet normals.
#[derive(Debug, Clone)]
pub struct Polytope {
    vertices: Vec<Vec<f64>>,
    /// Facet normals scaled so the facets are `<a, x> = 1`.
    normals: Vec<Vec<f64>>,
    volume: Option<f64>,
    even: bool,
    name: String,
}

const POLYTOPE_TOL: f64 = 1e-9;

impl Polytope {
    /// From vertices and halfspaces `<a, x> <= b`; the two lists must
    /// describe the same polytope.
    pub fn new(vertices: Vec<Vec<f64>>, halfspaces: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let n = vertices.first().map(|v| v.len()).unwrap_or(0);
        if n == 0 || halfspaces.len() <= n || vertices.len() <= n {
            return Err(Error::InvalidArgument("polytope needs more than n vertices and facets".into()));
        }
        if vertices.iter().any(|v| v.len() != n) || halfspaces.iter().any(|(a, _)| a.len() != n) {
            return Err(Error::InvalidArgument("polytope dimension mismatch".into()));
        }
        if halfspaces.iter().any(|(_, b)| !(*b > 0.0)) {
            return Err(Error::OriginNotInterior);
        }
        let normals: Vec<Vec<f64>> = halfspaces.iter().map(|(a, b)| a.iter().map(|v| v / b).collect()).collect();
        let scale = vertices.iter().map(|v| crate::convex_core::norm(v)).fold(1.0, f64::max);
        for v in &vertices {
            let worst = normals.iter().map(|a| dot(a, v)).fold(f64::NEG_INFINITY, f64::max);
            if worst > 1.0 + POLYTOPE_TOL * scale {
                return Err(Error::InvalidArgument(format!("vertex {v:?} violates a facet by {}", worst - 1.0)));
            }
        }
        for a in &normals {
            let touch = vertices.iter().filter(|v| (dot(a, v) - 1.0).abs() <= POLYTOPE_TOL * scale).count();
            if touch < n {
                return Err(Error::InvalidArgument(format!("facet {a:?} touches {touch} vertices")));
            }
        }
        let even = vertices
            .iter()
            .all(|v| vertices.iter().any(|w| v.iter().zip(w).all(|(a, b)| (a + b).abs() <= POLYTOPE_TOL)));
        Ok(Self {
            vertices,
            normals,
            volume: None,
            even,
            name: format!("polytope{n}"),
        })
    }

    /// Convex polygon from its vertices in any order.
    pub fn polygon(vertices: &[[f64; 2]]) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidArgument("polygon needs three vertices".into()));
        }
        let m = vertices.len() as f64;
        let c = [
            vertices.iter().map(|v| v[0]).sum::<f64>() / m,
            vertices.iter().map(|v| v[1]).sum::<f64>() / m,
        ];
        let mut vs = vertices.to_vec();
        vs.sort_by(|a, b| (a[1] - c[1]).atan2(a[0] - c[0]).total_cmp(&(b[1] - c[1]).atan2(b[0] - c[0])));
        let k = vs.len();
        let mut halfspaces = Vec::with_capacity(k);
        let mut area = 0.0;
        for i in 0..k {
            let (p, q, r) = (vs[i], vs[(i + 1) % k], vs[(i + 2) % k]);
            let turn = (q[0] - p[0]) * (r[1] - q[1]) - (q[1] - p[1]) * (r[0] - q[0]);
            if !(turn > 0.0) {
                return Err(Error::InvalidArgument("polygon vertices are not in convex position".into()));
            }
            let normal = vec![q[1] - p[1], p[0] - q[0]];
            let b = normal[0] * p[0] + normal[1] * p[1];
            if !(b > POLYTOPE_TOL) {
                return Err(Error::OriginNotInterior);
            }
            halfspaces.push((normal, b));
            area += 0.5 * (p[0] * q[1] - q[0] * p[1]);
        }
        let mut poly = Self::new(vs.iter().map(|v| v.to_vec()).collect(), halfspaces)?;
        poly.volume = Some(area);
        poly.name = format!("polygon{k}");
        Ok(poly)
    }

    /// `[-1, 1]^n`, the unit ball of `l_inf`.
    pub fn cube(n: usize) -> Self {
        let mut halfspaces = Vec::new();
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut a = vec![0.0; n];
                a[i] = s;
                halfspaces.push((a, 1.0));
            }
        }
        let mut p = Self::new(sign_vectors(n), halfspaces).expect("cube is consistent");
        p.volume = Some(2f64.powi(n as i32));
        p.name = format!("cube{n}");
        p
    }

    /// The unit ball of `l_1`.
    pub fn cross_polytope(n: usize) -> Self {
        let mut vertices = Vec::new();
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut v = vec![0.0; n];
                v[i] = s;
                vertices.push(v);
            }
        }
        let halfspaces = sign_vectors(n).into_iter().map(|a| (a, 1.0)).collect();
        let mut p = Self::new(vertices, halfspaces).expect("cross-polytope is consistent");
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        p.volume = Some(2f64.powi(n as i32) / fact);
        p.name = format!("cross{n}");
        p
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Facet normals `a_k` of `{<a_k, x> <= 1}`.
    pub fn normals(&self) -> &[Vec<f64>] {
        &self.normals
    }

    fn active(&self, x: &[f64]) -> (usize, f64, bool) {
        let (mut best, mut val, mut tie) = (0, dot(&self.normals[0], x), false);
        for (k, a) in self.normals.iter().enumerate().skip(1) {
            let v = dot(a, x);
            if v > val {
                (best, val, tie) = (k, v, false);
            } else if v == val {
                tie = true;
            }
        }
        (best, val, tie)
    }
}

fn sign_vectors(n: usize) -> Vec<Vec<f64>> {
    (0..1usize << n)
        .map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect())
        .collect()
}

impl ConvexBody for Polytope {
    fn dim(&self) -> usize {
        self.vertices[0].len()
    }
    fn gauge(&self, x: &[f64]) -> f64 {
        self.active(x).1.max(0.0)
    }
    fn support(&self, y: &[f64]) -> f64 {
        self.vertices.iter().map(|v| dot(v, y)).fold(f64::NEG_INFINITY, f64::max)
    }
    fn gauge_grad(&self, x: &[f64]) -> Option<DVector<f64>> {
        let (k, v, tie) = self.active(x);
        (!tie && v > 0.0).then(|| dvec(&self.normals[k]))
    }
    fn gauge_hess(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        self.gauge_grad(x).map(|_| DMatrix::zeros(self.dim(), self.dim()))
    }
    fn polar(&self) -> Result<Body> {
        let halfspaces = self.vertices.iter().map(|v| (v.clone(), 1.0)).collect();
        let mut p = Polytope::new(self.normals.clone(), halfspaces)?;
        p.name = format!("{}-polar", self.name);
        Ok(Arc::new(p))
    }
    fn volume(&self) -> Option<f64> {
        self.volume
    }
    fn curvature_positive_ae(&self) -> bool {
        false
    }
    fn circle_breaks(&self) -> Vec<f64> {
        self.vertices.iter().map(|v| v[1].atan2(v[0])).collect()
    }
    fn is_even(&self) -> bool {
        self.even
    }
    fn label(&self) -> String {
        self.name.clone()
    }
}

/// `A K` for invertible `A`.
#[derive(Debug, Clone)]
pub struct LinearImage {
    a: DMatrix<f64>,
    a_inv: DMatrix<f64>,
    det: f64,
    inner: Body,
}

impl LinearImage {
    pub fn new(a: DMatrix<f64>, inner: Body) -> Result<Self> {
        let n = inner.dim();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::InvalidArgument("linear map shape mismatch".into()));
        }
        let det = a.determinant();
        let a_inv = a.clone().try_inverse().ok_or(Error::SingularMatrix { det })?;
        if !(det.abs() > 1e-14) {
            return Err(Error::SingularMatrix { det });
        }
        Ok(Self { a, a_inv, det, inner })
    }

    fn pull(&self, x: &[f64]) -> Vec<f64> {
        (&self.a_inv * dvec(x)).as_slice().to_vec()
    }
}

impl ConvexBody for LinearImage {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn gauge(&self, x: &[f64]) -> f64 {
        self.inner.gauge(&self.pull(x))
    }
    fn support(&self, y: &[f64]) -> f64 {
        let t = self.a.transpose() * dvec(y);
        self.inner.support(t.as_slice())
    }
    fn gauge_grad(&self, x: &[f64]) -> Option<DVector<f64>> {
        self.inner.gauge_grad(&self.pull(x)).map(|g| self.a_inv.transpose() * g)
    }
    fn gauge_hess(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        self.inner
            .gauge_hess(&self.pull(x))
            .map(|h| self.a_inv.transpose() * h * &self.a_inv)
    }
    fn polar(&self) -> Result<Body> {
        Ok(Arc::new(LinearImage::new(self.a_inv.transpose(), self.inner.polar()?)?))
    }
    fn volume(&self) -> Option<f64> {
        self.inner.volume().map(|v| v * self.det.abs())
    }
    fn ellipsoid_matrix(&self) -> Option<DMatrix<f64>> {
        self.inner
            .ellipsoid_matrix()
            .map(|m| self.a_inv.transpose() * m * &self.a_inv)
    }
    fn curvature_positive_ae(&self) -> bool {
        self.inner.curvature_positive_ae()
    }
    fn circle_breaks(&self) -> Vec<f64> {
        if self.dim() != 2 {
            return Vec::new();
        }
        self.inner
            .circle_breaks()
            .into_iter()
            .map(|t| {
                let v = &self.a * DVector::from_vec(vec![t.cos(), t.sin()]);
                v[1].atan2(v[0])
            })
            .collect()
    }
    fn is_even(&self) -> bool {
        self.inner.is_even()
    }
    fn label(&self) -> String {
        format!("A.{}", self.inner.label())
    }
}
