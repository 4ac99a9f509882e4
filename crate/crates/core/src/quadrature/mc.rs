use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{screen, AxisBox, IntegrationResult, IntegrationSpec, Method};
use crate::error::{Error, Result};

/// Proposal distribution with a known density.
pub trait Sampler: Send + Sync {
    fn dim(&self) -> usize;
    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]);
    fn ln_density(&self, x: &[f64]) -> f64;
    fn method(&self) -> Method {
        Method::Importance
    }
}

/// Uniform proposal on a box.
#[derive(Debug, Clone)]
pub struct UniformBoxSampler {
    region: AxisBox,
    ln_vol: f64,
}

impl UniformBoxSampler {
    pub fn new(region: AxisBox) -> Self {
        let ln_vol = region.volume().ln();
        Self { region, ln_vol }
    }
}

impl Sampler for UniformBoxSampler {
    fn dim(&self) -> usize {
        self.region.dim()
    }

    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = rng.random_range(self.region.lo[i]..self.region.hi[i]);
        }
    }

    fn ln_density(&self, x: &[f64]) -> f64 {
        if self.region.contains(x) {
            -self.ln_vol
        } else {
            f64::NEG_INFINITY
        }
    }

    fn method(&self) -> Method {
        Method::MonteCarlo
    }
}

/// Gaussian proposal `N(mean, cov)`.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    mean: DVector<f64>,
    chol: DMatrix<f64>,
    precision: DMatrix<f64>,
    ln_norm: f64,
}

impl GaussianSampler {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        let det = cov.determinant();
        let chol = cov
            .clone()
            .cholesky()
            .ok_or(Error::SingularMatrix { det })?;
        let precision = chol.inverse();
        let l = chol.l();
        let ln_det: f64 = (0..n).map(|i| 2.0 * l[(i, i)].ln()).sum();
        let ln_norm = -0.5 * (n as f64 * (2.0 * std::f64::consts::PI).ln() + ln_det);
        Ok(Self {
            mean,
            chol: l,
            precision,
            ln_norm,
        })
    }

    /// Proposal matched to `exp(-<A(x - c), x - c>/2)`: covariance `A^{-1}`.
    pub fn matched_to_precision(center: DVector<f64>, a: &DMatrix<f64>) -> Result<Self> {
        let det = a.determinant();
        let inv = a.clone().try_inverse().ok_or(Error::SingularMatrix { det })?;
        Self::new(center, 0.5 * (&inv + inv.transpose()))
    }
}

impl Sampler for GaussianSampler {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let z = DVector::from_fn(self.mean.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = &self.mean + &self.chol * z;
        out.copy_from_slice(x.as_slice());
    }

    fn ln_density(&self, x: &[f64]) -> f64 {
        let d = DVector::from_column_slice(x) - &self.mean;
        self.ln_norm - 0.5 * d.dot(&(&self.precision * &d))
    }
}

/// Importance-sampled mean of `g / q` with its standard error.
///
/// Sequential and seeded, so a fixed seed reproduces the value bitwise.
pub fn integrate_mc<F, S>(g: &F, sampler: &S, spec: &IntegrationSpec) -> Result<IntegrationResult>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
    S: Sampler + ?Sized,
{
    spec.validate()?;
    let n = sampler.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut x = vec![0.0; n];
    let (mut sum, mut sum_sq, mut sum_abs) = (0.0f64, 0.0f64, 0.0f64);
    let mut clipped = 0;
    let budget = spec.budget;
    for _ in 0..budget {
        sampler.sample(&mut rng, &mut x);
        let w = match screen(g(&x), &x)? {
            Some(v) => v * (-sampler.ln_density(&x)).exp(),
            None => {
                clipped += 1;
                0.0
            }
        };
        if !w.is_finite() {
            return Err(Error::NonFiniteIntegrand { point: x.clone() });
        }
        sum += w;
        sum_sq += w * w;
        sum_abs += w.abs();
    }
    let nf = budget as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0);
    let stderr = (var / nf).sqrt();
    let ess = if sum_sq > 0.0 { sum_abs * sum_abs / sum_sq } else { 0.0 };
    if ess < 0.01 * nf {
        return Err(Error::DegenerateWeights { ess, budget });
    }
    Ok(IntegrationResult {
        value: mean,
        error_estimate: stderr,
        evals: budget,
        method: sampler.method(),
        converged: spec.accepts(mean, stderr),
        clipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec() -> IntegrationSpec {
        IntegrationSpec::monte_carlo(7).with_budget(200_000)
    }

    #[test]
    fn density_integrates_to_one() {
        let s = GaussianSampler::new(DVector::from_vec(vec![0.5, -1.0]), DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]))
            .unwrap();
        let r = integrate_mc(&|x: &[f64]| s.ln_density(x).exp(), &s, &spec()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn matched_gaussian_integral() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let proposal = GaussianSampler::matched_to_precision(DVector::zeros(2), &(0.8 * &a)).unwrap();
        let a2 = a.clone();
        let g = move |x: &[f64]| {
            let v = DVector::from_column_slice(x);
            (-0.5 * v.dot(&(&a2 * &v))).exp()
        };
        let r = integrate_mc(&g, &proposal, &spec()).unwrap();
        let expected = 2.0 * PI / a.determinant().sqrt();
        assert!((r.value - expected).abs() <= 3.0 * r.error_estimate, "{} vs {expected} ± {}", r.value, r.error_estimate);
    }

    #[test]
    fn seeded_runs_are_bitwise_identical() {
        let s = UniformBoxSampler::new(AxisBox::cube(3, 2.0));
        let g = |x: &[f64]| (-x.iter().map(|v| v * v).sum::<f64>()).exp();
        let a = integrate_mc(&g, &s, &spec()).unwrap();
        let b = integrate_mc(&g, &s, &spec()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a, b);
    }

    #[test]
    fn spike_is_degenerate() {
        let s = UniformBoxSampler::new(AxisBox::cube(2, 10.0));
        let g = |x: &[f64]| (-1e4 * (x[0] * x[0] + x[1] * x[1])).exp();
        let err = integrate_mc(&g, &s, &spec()).unwrap_err();
        assert!(matches!(err, Error::DegenerateWeights { .. }));
    }
}
