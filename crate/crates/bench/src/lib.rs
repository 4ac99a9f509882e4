//! Fixtures shared by the criterion benches.

use std::sync::Arc;

use convexa::sconcave::SConcaveFunction;
use convexa::{IntegrationSpec, Oracle, QuadraticForm, SmoothConvexFamily};
use nalgebra::DMatrix;

pub fn gaussian(diag: &[f64]) -> Oracle {
    Arc::new(QuadraticForm::diagonal(diag).expect("positive diagonal"))
}

/// Seeded non-quadratic potential, the same family the suites sample from.
pub fn smooth(n: usize, seed: u64) -> Oracle {
    Arc::new(SmoothConvexFamily::seeded(n, seed))
}

/// `(1 - s|x|^2/2)_+^{α/s}` in dimension `n`.
pub fn s_profile(n: usize, s: f64, alpha: f64) -> SConcaveFunction {
    SConcaveFunction::profile(s, DMatrix::identity(n, n), alpha, 1.0).expect("valid profile")
}

/// Tolerance loose enough that one iteration stays in the millisecond range.
pub fn bench_spec() -> IntegrationSpec {
    IntegrationSpec::default().with_rel_tol(1e-6).with_budget(200_000)
}
