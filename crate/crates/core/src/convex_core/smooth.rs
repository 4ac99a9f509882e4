use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{dvec, BoundingBox, ConvexFunction, QuadraticForm};
use crate::error::{Error, Result};
use crate::quadrature::DEFAULT_TRUNCATION_LEVEL;

/// `w * softplus(<d, x> - b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeTerm {
    pub weight: f64,
    pub direction: Vec<f64>,
    pub bias: f64,
}

fn softplus(t: f64) -> f64 {
    if t > 30.0 {
        t + (-t).exp()
    } else {
        t.exp().ln_1p()
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Quadratic base plus smooth convex ridges: strictly convex and `C^∞`,
/// with Hessian `A + Σ w σ'(t) d dᵀ >= A`.
#[derive(Debug, Clone)]
pub struct SmoothConvexFamily {
    base: QuadraticForm,
    ridges: Vec<RidgeTerm>,
    seed: Option<u64>,
    bbox: BoundingBox,
}

impl SmoothConvexFamily {
    pub fn new(base: QuadraticForm, ridges: Vec<RidgeTerm>) -> Result<Self> {
        let n = base.dim();
        for r in &ridges {
            if r.direction.len() != n || !(r.weight >= 0.0) {
                return Err(Error::InvalidArgument("ridge term needs weight >= 0 and matching dimension".into()));
            }
        }
        let mut f = Self {
            bbox: BoundingBox::cube(n, 1.0),
            base,
            ridges,
            seed: None,
        };
        // psi >= base pointwise, so the base level set at psi(0) + L contains ours.
        let psi0 = f.eval(&vec![0.0; n]);
        let base0 = f.base.eval(&vec![0.0; n]);
        f.bbox = f.base.level_box(DEFAULT_TRUNCATION_LEVEL + psi0 - base0);
        Ok(f)
    }

    /// Seeded random member: base eigenvalues in `[0.5, 2]` under a random
    /// rotation, one to three ridges with weights in `[0.2, 1]`.
    pub fn seeded(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let q = g.qr().q();
        let eig = DVector::from_fn(n, |_, _| rng.random_range(0.5..2.0));
        let a = &q * DMatrix::from_diagonal(&eig) * q.transpose();
        let base = QuadraticForm::new(0.5 * (&a + a.transpose()), DVector::zeros(n), 0.0).expect("eigenvalues >= 0.5");
        let k = rng.random_range(1..=3);
        let ridges = (0..k)
            .map(|_| {
                let d: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let r = super::norm(&d).max(1e-12);
                RidgeTerm {
                    weight: rng.random_range(0.2..1.0),
                    direction: d.iter().map(|v| v / r).collect(),
                    bias: rng.random_range(-1.0..1.0),
                }
            })
            .collect();
        let mut f = Self::new(base, ridges).expect("seeded family is valid");
        f.seed = Some(seed);
        f
    }

    pub fn base(&self) -> &QuadraticForm {
        &self.base
    }

    pub fn ridges(&self) -> &[RidgeTerm] {
        &self.ridges
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

impl ConvexFunction for SmoothConvexFamily {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.base.eval(x);
        for r in &self.ridges {
            v += r.weight * softplus(super::dot(&r.direction, x) - r.bias);
        }
        v
    }

    fn grad(&self, x: &[f64]) -> Option<DVector<f64>> {
        let mut g = self.base.grad(x)?;
        for r in &self.ridges {
            let s = sigmoid(super::dot(&r.direction, x) - r.bias);
            g += r.weight * s * dvec(&r.direction);
        }
        Some(g)
    }

    fn hess(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let mut h = self.base.matrix().clone();
        for r in &self.ridges {
            let s = sigmoid(super::dot(&r.direction, x) - r.bias);
            let d = dvec(&r.direction);
            h += r.weight * s * (1.0 - s) * &d * d.transpose();
        }
        Some(h)
    }

    fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }

    fn label(&self) -> String {
        match self.seed {
            Some(s) => format!("smooth{}-s{}", self.dim(), s),
            None => format!("smooth{}", self.dim()),
        }
    }
}
