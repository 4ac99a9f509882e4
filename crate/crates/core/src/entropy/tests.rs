use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use super::*;
use crate::convex_core::{Constant, PowerFunction, QuadraticForm, Restricted, SmoothConvexFamily};
use crate::quadrature::Method;

fn spec() -> IntegrationSpec {
    IntegrationSpec::default()
}

/// Gaussian with covariance `sigma` and mean `m`.
fn gaussian(sigma: DMatrix<f64>, m: &[f64]) -> LogConcaveMeasure {
    let a = sigma.try_inverse().unwrap();
    let q = QuadraticForm::new(0.5 * (&a + a.transpose()), DVector::from_column_slice(m), 0.0).unwrap();
    LogConcaveMeasure::new(Arc::new(q), &spec()).unwrap()
}

fn gamma(n: usize) -> LogConcaveMeasure {
    gaussian(DMatrix::identity(n, n), &vec![0.0; n])
}

#[test]
fn standard_gaussian_entropy() {
    let s = shannon_entropy(&gamma(1), &spec()).unwrap();
    assert!((s.value - 1.41894).abs() < 1e-5);
    assert!((s.value - gaussian_entropy(1)).abs() < 1e-10);
}

#[test]
fn gaussian_entropy_with_covariance() {
    let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]);
    let det = sigma.determinant();
    let s = shannon_entropy(&gaussian(sigma, &[0.5, -1.0]), &spec()).unwrap();
    assert!((s.value - (gaussian_entropy(2) + 0.5 * det.ln())).abs() < 1e-9);
}

#[test]
fn uniform_interval_has_zero_entropy() {
    let psi = Restricted::to_box(Arc::new(Constant::new(1, 0.0)), &[0.0], &[1.0]).unwrap();
    let spec = spec().with_method(Method::Adaptive).with_rel_tol(1e-9);
    let mu = LogConcaveMeasure::new(Arc::new(psi), &spec).unwrap();
    assert!((mu.normalization().value - 1.0).abs() < 1e-8);
    let s = shannon_entropy(&mu, &spec).unwrap();
    assert!(s.value.abs() < 1e-8, "{}", s.value);
}

#[test]
fn standard_gaussian_triple_vanishes() {
    for n in [1, 2] {
        let t = relative_entropy_and_fisher(&gamma(n), &spec()).unwrap();
        assert!(t.h.value.abs() < 1e-10 && t.i.value.abs() < 1e-10 && t.c.value.abs() < 1e-9);
    }
}

#[test]
fn one_dimensional_gaussian_triples() {
    for s2 in [0.5f64, 2.0, 3.0] {
        let t = relative_entropy_and_fisher(&gaussian(DMatrix::from_element(1, 1, s2), &[0.0]), &spec()).unwrap();
        let h = (s2 - 1.0) / 2.0 - 0.5 * s2.ln();
        let i = (s2 - 1.0).powi(2) / s2;
        assert!((t.h.value - h).abs() < 1e-9, "σ²={s2}");
        assert!((t.i.value - i).abs() < 1e-9, "σ²={s2}");
        assert!((t.c.value - (s2 - 1.0)).abs() < 1e-9, "σ²={s2}");
    }
}

#[test]
fn shifted_gaussian_triple() {
    let m = [0.8, -0.6];
    let t = relative_entropy_and_fisher(&gaussian(DMatrix::identity(2, 2), &m), &spec()).unwrap();
    assert!((t.c.value - 1.0).abs() < 1e-9);
    assert!((t.h.value - 0.5).abs() < 1e-9);
    assert!((t.i.value - 1.0).abs() < 1e-9);
}

#[test]
fn improved_logsob_closed_form_margins() {
    let r = logsob_improved_check(&gamma(2), &spec()).unwrap();
    assert!(r.improved.margin.abs() < 1e-9 && r.improved.passed());
    // Isotropic Gaussians of any variance are equality cases.
    for s2 in [0.5, 2.0] {
        let r = logsob_improved_check(&gaussian(DMatrix::from_element(1, 1, s2), &[0.0]), &spec()).unwrap();
        assert!(r.improved.margin.abs() < 1e-8, "σ²={s2}: {}", r.improved.margin);
        let i = (s2 - 1.0f64).powi(2) / s2;
        let h = (s2 - 1.0) / 2.0 - 0.5 * s2.ln();
        assert!((r.gross.margin - (0.5 * i - h)).abs() < 1e-8);
        assert!(r.gross.strictly_satisfied());
    }
    // diag(1, 4): the margin is log(tr Σ⁻¹ / n) + log det Σ / 2 = log 1.25.
    let r = logsob_improved_check(&gaussian(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0])), &[0.0, 0.0]), &spec()).unwrap();
    assert!((r.improved.margin - 1.25f64.ln()).abs() < 1e-8, "{}", r.improved.margin);
}

#[test]
fn improved_logsob_on_seeded_family() {
    for seed in 0..3u64 {
        let mu = LogConcaveMeasure::new(Arc::new(SmoothConvexFamily::seeded(2, seed)), &spec()).unwrap();
        let r = logsob_improved_check(&mu, &spec()).unwrap();
        assert!(r.improved.passed() && r.gross.passed(), "seed {seed}: {:?}", r.improved);
        assert!(r.improved_bound <= r.gross_bound + 1e-12);
    }
}

#[test]
fn reverse_logsob_gaussian_equality() {
    let r = reverse_logsob_check(&gamma(2), &spec()).unwrap();
    assert!(r.lhs.value.abs() < 1e-12 && r.rhs.abs() < 1e-9);
    let r = reverse_logsob_check(
        &gaussian(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0])), &[0.3, 0.0]),
        &spec(),
    )
    .unwrap();
    assert!((r.lhs.value + 4f64.ln()).abs() < 1e-9);
    assert!((r.rhs + 4f64.ln()).abs() < 1e-8);
    assert!((r.boundary_term.value - 2.0).abs() < 1e-8);
    assert!(r.comparison.passed());
}

#[test]
fn reverse_logsob_quartic_is_strict() {
    let mu = LogConcaveMeasure::new(Arc::new(PowerFunction::new(1, 4.0, 0.0).unwrap()), &spec()).unwrap();
    let r = reverse_logsob_check(&mu, &spec()).unwrap();
    assert!(r.comparison.strictly_satisfied(), "{:?}", r.comparison);
    assert!(r.boundary.passed());
    assert!(r.irregular_mass < 1e-3);
}

/// Second-derivative-free oracle: high-resolution midpoint sums for the quartic.
#[test]
fn reverse_logsob_quartic_against_direct_sums() {
    let (h, m) = (1e-5, 600_000);
    let (mut z, mut s, mut l) = (0.0, 0.0, 0.0);
    for k in 0..m {
        let x = (k as f64 + 0.5) * h;
        let w = (-x.powi(4) / 4.0).exp() * h * 2.0;
        z += w;
        s += w * x.powi(4) / 4.0;
        l += w * (3.0 * x * x).ln();
    }
    let entropy = s / z + z.ln();
    let lhs = l / z;
    let mu = LogConcaveMeasure::new(Arc::new(PowerFunction::new(1, 4.0, 0.0).unwrap()), &spec()).unwrap();
    let r = reverse_logsob_check(&mu, &spec()).unwrap();
    assert!((r.entropy.value - entropy).abs() < 1e-6);
    assert!((r.lhs.value - lhs).abs() < 1e-3, "{} vs {}", r.lhs.value, lhs);
}

#[test]
fn flat_potential_is_degenerate() {
    let psi = Restricted::to_box(Arc::new(Constant::new(2, 0.0)), &[-1.0, -1.0], &[1.0, 1.0]).unwrap();
    let mu = LogConcaveMeasure::new(Arc::new(psi), &spec()).unwrap();
    let err = reverse_logsob_check(&mu, &spec()).unwrap_err();
    assert!(matches!(err, Error::DegenerateHessian { .. }));
}

#[test]
fn boundary_term_drops_below_n_on_bounded_domains() {
    let inner: crate::convex_core::Oracle = Arc::new(QuadraticForm::isotropic(1));
    let psi = Restricted::to_box(inner, &[-1.0], &[1.0]).unwrap();
    let spec = spec().with_method(Method::Adaptive).with_rel_tol(1e-9);
    let mu = LogConcaveMeasure::new(Arc::new(psi), &spec).unwrap();
    let r = reverse_logsob_check(&mu, &spec).unwrap();
    assert!(r.boundary_term.value < 1.0 - 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn reverse_logsob_is_translation_invariant(seed in 0u64..40, z in proptest::collection::vec(-1.5f64..1.5, 2)) {
        let psi: crate::convex_core::Oracle = Arc::new(SmoothConvexFamily::seeded(2, seed));
        let a = reverse_logsob_check(&LogConcaveMeasure::new(psi.clone(), &spec()).unwrap(), &spec()).unwrap();
        let moved = crate::convex_core::translate(&psi, &z);
        let b = reverse_logsob_check(&LogConcaveMeasure::new(moved, &spec()).unwrap(), &spec()).unwrap();
        prop_assert!((a.lhs.value - b.lhs.value).abs() < 1e-7);
        prop_assert!((a.rhs - b.rhs).abs() < 1e-7);
        prop_assert!(a.comparison.strictly_satisfied());
        prop_assert!(a.boundary_term.value <= 2.0 + 1e-6);
    }

    #[test]
    fn entropy_functionals_have_their_signs(seed in 0u64..40) {
        let mu = LogConcaveMeasure::new(Arc::new(SmoothConvexFamily::seeded(2, seed)), &spec()).unwrap();
        let t = relative_entropy_and_fisher(&mu, &spec()).unwrap();
        prop_assert!(t.h.value >= -1e-9);
        prop_assert!(t.i.value >= 0.0);
        prop_assert!(t.c.value >= -2.0);
    }
}
