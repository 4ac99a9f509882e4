//! Integration engines over boxes, spheres and star-shaped domains.
//!
//! Every engine returns an [`IntegrationResult`] carrying a value, an error
//! estimate, the number of integrand evaluations and the method that produced
//! it. Integrands are plain `Fn(&[f64]) -> f64` closures with two conventions:
//!
//! * `+inf` marks a point outside the integration domain; it contributes 0
//!   and is counted in [`IntegrationResult::clipped`].
//! * `NaN` is forbidden and aborts with [`Error::NonFiniteIntegrand`].

mod adaptive;
mod gauss;
mod lattice;
mod mc;
mod sphere;
mod star;
mod tanh_sinh;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use adaptive::integrate_adaptive;
pub use gauss::gauss_legendre;
pub use lattice::integrate_lattice;
pub use mc::{integrate_mc, GaussianSampler, Sampler, UniformBoxSampler};
pub use sphere::{integrate_circle_with_breakpoints, integrate_sphere, sphere_area};
pub use star::integrate_star;
pub use tanh_sinh::{integrate_tanh_sinh, TanhSinhRule};

/// Integration method tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Composite Gauss-Legendre tensor rule with successive refinement.
    Lattice,
    /// Globally adaptive box subdivision.
    Adaptive,
    /// Plain Monte Carlo under a uniform proposal.
    MonteCarlo,
    /// Importance sampling under a caller-supplied proposal.
    Importance,
    /// Tanh-sinh product rules (spheres and star-shaped domains).
    TanhSinh,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Lattice => "lattice",
            Method::Adaptive => "adaptive",
            Method::MonteCarlo => "monte_carlo",
            Method::Importance => "importance",
            Method::TanhSinh => "tanh_sinh",
        }
    }
}

/// Knobs shared by all engines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationSpec {
    pub method: Method,
    /// Maximum number of integrand evaluations.
    pub budget: usize,
    /// Target relative error.
    pub rel_tol: f64,
    /// Absolute floor under which an estimate always counts as converged.
    pub abs_tol: f64,
    /// Bounding boxes enclose the level set `psi >= psi(0) + truncation_level`.
    pub truncation_level: f64,
    pub seed: u64,
}

/// Lattice cap for `n <= 3`.
pub const DEFAULT_LATTICE_BUDGET: usize = 262_144;
/// Monte Carlo sample count for `n <= 10`.
pub const DEFAULT_MC_BUDGET: usize = 2_000_000;
pub const DEFAULT_TRUNCATION_LEVEL: f64 = 40.0;

impl Default for IntegrationSpec {
    fn default() -> Self {
        Self {
            method: Method::Lattice,
            budget: DEFAULT_LATTICE_BUDGET,
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            truncation_level: DEFAULT_TRUNCATION_LEVEL,
            seed: 0x5eed,
        }
    }
}

impl IntegrationSpec {
    pub fn monte_carlo(seed: u64) -> Self {
        Self {
            method: Method::MonteCarlo,
            budget: DEFAULT_MC_BUDGET,
            rel_tol: 1e-2,
            seed,
            ..Self::default()
        }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget < 1000 {
            return Err(Error::InvalidArgument(format!(
                "integration budget {} is below 1000",
                self.budget
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "rel_tol {} outside (0, 0.5)",
                self.rel_tol
            )));
        }
        if !(self.abs_tol >= 0.0) || !(self.truncation_level > 0.0) {
            return Err(Error::InvalidArgument(
                "abs_tol must be >= 0 and truncation_level > 0".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn accepts(&self, value: f64, error: f64) -> bool {
        error <= self.rel_tol * value.abs() || error <= self.abs_tol
    }
}

/// Outcome of an integration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evals: usize,
    pub method: Method,
    pub converged: bool,
    /// Number of evaluations that returned `+inf` and were dropped.
    pub clipped: usize,
}

impl IntegrationResult {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            error_estimate: 0.0,
            evals: 0,
            method: Method::Lattice,
            converged: true,
            clipped: 0,
        }
    }

    /// Adds an independent error contribution (e.g. a truncation tail).
    pub fn with_extra_error(mut self, extra: f64) -> Self {
        self.error_estimate += extra.abs();
        self
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.value *= factor;
        self.error_estimate *= factor.abs();
        self
    }

    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            self.error_estimate
        } else {
            self.error_estimate / self.value.abs()
        }
    }
}

/// Axis-aligned box `[lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "box bounds differ in dimension");
        Self { lo, hi }
    }

    pub fn cube(dim: usize, half_width: f64) -> Self {
        Self::new(vec![-half_width; dim], vec![half_width; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    pub fn translated(&self, shift: &[f64]) -> Self {
        Self::new(
            self.lo.iter().zip(shift).map(|(a, s)| a + s).collect(),
            self.hi.iter().zip(shift).map(|(b, s)| b + s).collect(),
        )
    }

    /// Smallest box containing both.
    pub fn union(&self, other: &AxisBox) -> Self {
        Self::new(
            self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect(),
            self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect(),
        )
    }

    pub fn corners(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|i| if mask >> i & 1 == 1 { self.hi[i] } else { self.lo[i] })
                    .collect()
            })
            .collect()
    }
}

/// Dispatches on `spec.method` for box integration.
pub fn integrate_box<F>(g: F, region: &AxisBox, spec: &IntegrationSpec) -> Result<IntegrationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    spec.validate()?;
    let result = match spec.method {
        Method::Lattice | Method::TanhSinh => integrate_lattice(&g, region, spec)?,
        Method::Adaptive => integrate_adaptive(&g, region, spec)?,
        Method::MonteCarlo | Method::Importance => {
            let sampler = UniformBoxSampler::new(region.clone());
            integrate_mc(&g, &sampler, spec)?
        }
    };
    if result.converged {
        Ok(result)
    } else {
        Err(Error::BudgetExhausted { partial: result })
    }
}

/// Like [`integrate_box`] but hands back the partial result instead of
/// `BudgetExhausted`; the error estimate still reflects the shortfall.
pub fn integrate_box_best_effort<F>(
    g: F,
    region: &AxisBox,
    spec: &IntegrationSpec,
) -> Result<IntegrationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    match integrate_box(g, region, spec) {
        Ok(r) => Ok(r),
        Err(Error::BudgetExhausted { partial }) => Ok(partial),
        Err(e) => Err(e),
    }
}

/// Classifies one integrand value: `Ok(None)` for a clipped `+inf`.
#[inline]
pub(crate) fn screen(value: f64, x: &[f64]) -> Result<Option<f64>> {
    if value.is_nan() {
        Err(Error::NonFiniteIntegrand { point: x.to_vec() })
    } else if value == f64::INFINITY {
        Ok(None)
    } else if value == f64::NEG_INFINITY {
        Err(Error::NonFiniteIntegrand { point: x.to_vec() })
    } else {
        Ok(Some(value))
    }
}

/// Rounding-error floor for a sum of weighted terms.
#[inline]
pub(crate) fn rounding_floor(abs_sum: f64, terms: usize) -> f64 {
    abs_sum * f64::EPSILON * (terms as f64).sqrt().max(1.0) * 4.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn unit_square_constant() {
        let r = integrate_box(|_| 1.0, &AxisBox::new(vec![0.0; 2], vec![1.0; 2]), &IntegrationSpec::default())
            .unwrap();
        assert_relative_eq!(r.value, 1.0, epsilon = 1e-14);
        assert!(r.converged);
    }

    #[test]
    fn gaussian_normalization_2d() {
        let r = integrate_box(
            |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp(),
            &AxisBox::cube(2, 8.0),
            &IntegrationSpec::default(),
        )
        .unwrap();
        assert!((r.value - 2.0 * PI).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn quartic_gamma_identity() {
        // 2 * Gamma(5/4)
        let expected = 2.0 * statrs::function::gamma::gamma(1.25);
        let r = integrate_box(|x| (-x[0].powi(4)).exp(), &AxisBox::cube(1, 4.0), &IntegrationSpec::default())
            .unwrap();
        assert!((r.value - expected).abs() < 1e-10);
        assert!((r.value - 1.81280).abs() < 1e-5);
    }

    #[test]
    fn nan_is_rejected() {
        let err = integrate_box(|_| f64::NAN, &AxisBox::cube(1, 1.0), &IntegrationSpec::default()).unwrap_err();
        assert!(matches!(err, Error::NonFiniteIntegrand { .. }));
    }

    #[test]
    fn infinity_is_clipped() {
        let r = integrate_box(
            |x| if x[0] > 0.0 { f64::INFINITY } else { 1.0 },
            &AxisBox::cube(1, 1.0),
            &IntegrationSpec::default(),
        )
        .unwrap();
        assert_relative_eq!(r.value, 1.0, epsilon = 1e-12);
        assert!(r.clipped > 0);
    }

    #[test]
    fn budget_exhaustion_carries_partial() {
        let spec = IntegrationSpec::default().with_budget(1000).with_rel_tol(1e-15);
        let err = integrate_box(
            |x| (x[0] * 50.0).sin().abs() * (x[1] * 37.0).cos().abs() * x[2].abs().sqrt(),
            &AxisBox::cube(3, 1.0),
            &spec,
        )
        .unwrap_err();
        match err {
            Error::BudgetExhausted { partial } => {
                assert!(!partial.converged);
                assert!(partial.evals <= 1000);
                assert!(partial.value.is_finite());
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn spec_validation() {
        assert!(IntegrationSpec::default().with_budget(10).validate().is_err());
        assert!(IntegrationSpec::default().with_rel_tol(0.7).validate().is_err());
        assert!(IntegrationSpec::default().validate().is_ok());
    }
}
