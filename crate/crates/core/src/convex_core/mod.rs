//! Convex-function oracles, derivative estimates, domains and the regular set.

mod bbox;
mod combinators;
mod fd;
mod quadratic;
mod smooth;
mod transform;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

pub use crate::quadrature::AxisBox as BoundingBox;
pub use bbox::{estimate_bounding_box, ray_directions};
pub use combinators::{Constant, HingeSquared, PointwiseMax, PointwiseMin, PowerFunction, Restricted, SmoothedMax};
pub use fd::{
    fd_gradient, fd_hessian, fd_step, gradient, hessian, in_regular_set, regular_fraction, DEFAULT_DET_TOL,
};
pub use quadratic::QuadraticForm;
pub use smooth::{RidgeTerm, SmoothConvexFamily};
pub use transform::{compose_linear, tilt, translate, ComposeLinear, Tilt, Translate};

/// Where a point sits relative to the effective domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainStatus {
    Interior,
    Boundary,
    Outside,
}

/// Local data of an oracle at one point.
#[derive(Debug, Clone)]
pub struct Jet {
    pub value: f64,
    pub grad: Option<DVector<f64>>,
    pub hess: Option<DMatrix<f64>>,
}

/// Oracle for a convex `psi: R^n -> R ∪ {+inf}`.
///
/// Implementations are immutable after construction and may be evaluated
/// from many threads.
pub trait ConvexFunction: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// Value at `x`, `+inf` outside the domain.
    fn eval(&self, x: &[f64]) -> f64;

    fn grad(&self, _x: &[f64]) -> Option<DVector<f64>> {
        None
    }

    fn hess(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    /// Value, gradient and Hessian together; override when they share work.
    fn jet(&self, x: &[f64]) -> Jet {
        Jet {
            value: self.eval(x),
            grad: self.grad(x),
            hess: self.hess(x),
        }
    }

    fn domain(&self, x: &[f64]) -> DomainStatus {
        if self.eval(x).is_finite() {
            DomainStatus::Interior
        } else {
            DomainStatus::Outside
        }
    }

    /// Box containing `{psi <= psi(0) + truncation level}`.
    fn bounding_box(&self) -> &BoundingBox;

    /// Closed-form Legendre transform, when one is known.
    fn legendre_dual(&self) -> Option<Oracle> {
        None
    }

    /// The function as an explicit quadratic form, when it is one.
    fn as_quadratic(&self) -> Option<QuadraticForm> {
        None
    }

    /// True when `psi(-x) = psi(x)` holds by construction.
    fn is_even(&self) -> bool {
        false
    }

    fn label(&self) -> String;

    #[doc(hidden)]
    fn as_translate(&self) -> Option<(&Oracle, &[f64])> {
        None
    }
}

pub type Oracle = Arc<dyn ConvexFunction>;

pub fn dvec(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
