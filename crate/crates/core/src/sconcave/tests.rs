use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;

use super::*;
use crate::bodies::{as_p_body, Ellipsoid};
use crate::convex_core::QuadraticForm;
use crate::report::Relation;
use crate::entropy::{gaussian_entropy, shannon_entropy, LogConcaveMeasure};

fn spec() -> IntegrationSpec {
    IntegrationSpec::default().with_rel_tol(1e-9).with_budget(50_000_000)
}

fn m1(v: f64) -> DMatrix<f64> {
    DMatrix::from_element(1, 1, v)
}

/// `f = (1 - x²/4)²` on `[-2, 2]`: `s = 1/2`, `α = 1`, `ψ = x²/2`.
fn quartic_profile() -> SConcaveFunction {
    SConcaveFunction::profile(0.5, m1(1.0), 1.0, 1.0).unwrap()
}

fn grid_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, count: usize) -> f64 {
    (0..=count)
        .map(|i| f(a + (b - a) * i as f64 / count as f64))
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn quartic_profile_integrates_to_32_over_15() {
    let fs = quartic_profile();
    assert!((fs.psi().eval(&[1.2]) - 0.72).abs() < 1e-14);
    let total = fs.integral(&spec()).unwrap();
    assert!((total.value - 32.0 / 15.0).abs() < 1e-10, "{}", total.value);
    let a0 = as_lambda_s(0.0, &fs, &spec()).unwrap();
    assert!((a0.value - 32.0 / 15.0).abs() < 1e-9, "{}", a0.value);
}

#[test]
fn dual_of_ball_indicator_at_s_one() {
    let ball: crate::bodies::Body = Arc::new(Ellipsoid::ball(2));
    let fs = SConcaveFunction::indicator(1.0, ball).unwrap();
    for y in [[0.0, 0.0], [0.3, 0.0], [0.2, -0.4], [-0.5, 0.5], [0.9, 0.1], [1.2, 0.3]] {
        // Dense grid infimum of (1 - <x,y>)_+ over the disk.
        let count = 1000;
        let mut oracle = f64::INFINITY;
        for i in 0..=count {
            for j in 0..=count {
                let x = [-1.0 + 2.0 * i as f64 / count as f64, -1.0 + 2.0 * j as f64 / count as f64];
                if x[0] * x[0] + x[1] * x[1] <= 1.0 {
                    oracle = oracle.min((1.0 - x[0] * y[0] - x[1] * y[1]).max(0.0));
                }
            }
        }
        let got = s_dual_at(&fs, &y).unwrap();
        let cell = 2.0 / count as f64 * (y[0].abs() + y[1].abs());
        assert!(got <= oracle + 1e-12 && got >= oracle - 2.0 * cell, "{y:?}: {got} vs {oracle}");
        let closed = (1.0 - (y[0] * y[0] + y[1] * y[1]).sqrt()).max(0.0);
        assert!((got - closed).abs() < 1e-8, "{y:?}: {got} vs {closed}");
    }
}

#[test]
fn dual_support_is_scaled_polar() {
    // f = 1 on the disk of radius 2 with s = 1/2: S_f° has radius 1/2, so f° lives on the unit disk.
    let body: crate::bodies::Body = Arc::new(Ellipsoid::axes(&[2.0, 2.0]).unwrap());
    let fs = SConcaveFunction::indicator(0.5, body).unwrap();
    let support = fs.dual_support().unwrap();
    for t in 0..16 {
        let a = t as f64 * std::f64::consts::PI / 8.0;
        let u = [a.cos(), a.sin()];
        assert!((support.radial(&u) - 1.0).abs() < 1e-12);
        // f° > 0 just inside, = 0 one grid cell outside.
        let inner = s_dual_at(&fs, &[0.99 * u[0], 0.99 * u[1]]).unwrap();
        let outer = s_dual_at(&fs, &[1.01 * u[0], 1.01 * u[1]]).unwrap();
        assert!(inner > 0.0 && outer == 0.0, "{inner} {outer}");
    }
}

#[test]
fn dual_at_origin_is_inverse_sup() {
    let fs = SConcaveFunction::profile(0.5, m1(1.0), 1.0, 1.7).unwrap();
    let v = s_dual_at(&fs, &[0.0]).unwrap();
    assert!((v - 1.0 / 1.7).abs() < 1e-10, "{v}");
}

#[test]
fn equality_family_dual_matches_grid_infimum() {
    let s = 0.5;
    let fs = SConcaveFunction::equality_family(s, &m1(1.0)).unwrap();
    let edge = (1.0 / s).sqrt();
    for y in [-0.6, -0.2, 0.1, 0.35, 0.7] {
        let oracle = grid_min(
            |x| {
                let fx = fs.f(&[x]);
                if fx > 0.0 {
                    (1.0 - s * x * y).max(0.0).powf(1.0 / s) / fx
                } else {
                    f64::INFINITY
                }
            },
            -edge,
            edge,
            2_000_000,
        );
        let got = s_dual_at(&fs, &[y]).unwrap();
        assert!((got - oracle).abs() < 1e-5, "{y}: {got} vs {oracle}");
        let via_psi = (1.0 - s * psi_star_s(&fs, &[y]).unwrap().value).powf(1.0 / s);
        assert!((via_psi - got).abs() < 1e-8, "{y}: {via_psi} vs {got}");
    }
}

#[test]
fn psi_star_s_matches_grid_supremum() {
    let fs = quartic_profile();
    let y = 0.3;
    let oracle = -grid_min(|x| -(x * y - 0.5 * x * x) / (1.0 - 0.25 * x * x), -1.999999, 1.999999, 2_000_000);
    let got = psi_star_s(&fs, &[y]).unwrap();
    assert!((got.value - oracle).abs() < 1e-5, "{} vs {oracle}", got.value);
    // psi >= 0 with psi(0) = 0 gives psi*_s(0) = 0.
    assert!(psi_star_s(&fs, &[0.0]).unwrap().value.abs() < 1e-15);
}

#[test]
fn psi_star_s_rejects_points_outside_dual_support() {
    let fs = quartic_profile();
    match psi_star_s(&fs, &[1.5]) {
        Err(Error::OutsideDualSupport { gap }) => assert!(gap < 0.0),
        other => panic!("{other:?}"),
    }
}

fn involution_residual(fs: &SConcaveFunction, probes: &[Vec<f64>]) -> f64 {
    let back = fs.dual().unwrap().dual().unwrap();
    probes
        .iter()
        .map(|x| (back.psi().eval(x) - fs.psi().eval(x)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn double_dual_returns_psi() {
    let fs = quartic_profile();
    let probes = fs.probe_points(100, 0.95, 3);
    let r = involution_residual(&fs, &probes);
    assert!(r < 1e-4, "{r}");
    let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.4, 0.4, 1.0]);
    let fs2 = SConcaveFunction::profile(1.0, m, 0.5, 1.0).unwrap();
    let probes = fs2.probe_points(100, 0.9, 4);
    let r = involution_residual(&fs2, &probes);
    assert!(r < 1e-4, "{r}");
}

#[test]
fn t_map_of_half_square_at_s_one() {
    // psi = x²/2 on |x| < √2.
    let fs = SConcaveFunction::profile(1.0, m1(1.0), 1.0, 1.0).unwrap();
    let tm = t_map(fs.psi().as_ref(), 1.0, &[0.5]).unwrap();
    assert!((tm.y[0] - 0.5 / 1.125).abs() < 1e-14);
    let h = 1e-5;
    let y = |x: f64| t_map(fs.psi().as_ref(), 1.0, &[x]).unwrap().y[0];
    let fd = (y(0.5 + h) - y(0.5 - h)) / (2.0 * h);
    assert!((tm.jacobian - fd).abs() < 1e-5, "{} vs {fd}", tm.jacobian);
    assert!((tm.differential[(0, 0)] - tm.jacobian).abs() < 1e-14);
}

#[test]
fn t_map_tends_to_gradient_as_s_vanishes() {
    let q: crate::convex_core::Oracle = Arc::new(
        QuadraticForm::new(
            DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]),
            nalgebra::DVector::zeros(2),
            0.0,
        )
        .unwrap(),
    );
    let x = [0.3, -0.7];
    let g = q.grad(&x).unwrap();
    let mut prev = f64::INFINITY;
    for s in [1e-1, 1e-2, 1e-3, 1e-4] {
        let tm = t_map(q.as_ref(), s, &x).unwrap();
        let err = ((tm.y[0] - g[0]).powi(2) + (tm.y[1] - g[1]).powi(2)).sqrt();
        assert!(err < 2.0 * s && err < prev, "{s}: {err}");
        prev = err;
    }
}

#[test]
fn t_map_round_trip() {
    for fs in [
        quartic_profile(),
        SConcaveFunction::profile(1.0, DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 3.0]), 0.5, 1.3).unwrap(),
    ] {
        let dual = fs.dual().unwrap();
        for x in fs.probe_points(20, 0.9, 11) {
            let y = t_map(fs.psi().as_ref(), fs.s(), &x).unwrap().y;
            let back = t_map(dual.psi().as_ref(), fs.s(), &y).unwrap().y;
            let err = back.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-5, "{x:?}: {err}");
        }
    }
}

#[test]
fn endpoint_identities() {
    for fs in [
        SConcaveFunction::profile(1.0, m1(2.0), 0.5, 1.0).unwrap(),
        SConcaveFunction::profile(0.5, m1(1.0), 0.75, 1.3).unwrap(),
        SConcaveFunction::profile(0.5, DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]), 0.75, 0.8).unwrap(),
    ] {
        let dual = fs.dual().unwrap();
        assert!(dual.edge_value(16) < 1e-3, "{}", dual.edge_value(16));
        let a0 = as_lambda_s(0.0, &fs, &spec()).unwrap();
        let total = fs.integral(&spec()).unwrap();
        assert!((a0.value - total.value).abs() <= 3.0 * (a0.error_estimate + total.error_estimate) + 1e-9 * total.value);
        let a1 = as_lambda_s(1.0, &fs, &spec()).unwrap();
        let dual_total = dual.integral(&spec()).unwrap();
        let tol = 3.0 * (a1.error_estimate + dual_total.error_estimate) + 1e-7 * dual_total.value;
        assert!((a1.value - dual_total.value).abs() <= tol, "{} vs {}", a1.value, dual_total.value);
    }
}

#[test]
fn as_one_misses_dual_integral_when_the_dual_profile_is_not_regular() {
    // f = (1 - x²/4)²: T_ψ(x) = x/(1 + x²/4) and f°(T_ψ x) = (1 + x²/4)^{-2}, so f°(±1) = 1/4.
    // as_1 = (2/3) ∫ (1 + x²/4)^{-3} dx = (8/3)(3π/32 + 1/4);
    // ∫ f° = ∫ (1 - x²/4)(1 + x²/4)^{-4} dx = (3 + π + 1/3)/4.
    let fs = quartic_profile();
    let dual = fs.dual().unwrap();
    assert!((dual.edge_value(2) - 0.25).abs() < 1e-3, "{}", dual.edge_value(2));
    let a1 = as_lambda_s(1.0, &fs, &spec()).unwrap().value;
    let pi = std::f64::consts::PI;
    assert!((a1 - 8.0 / 3.0 * (3.0 * pi / 32.0 + 0.25)).abs() < 1e-9, "{a1}");
    let dual_total = dual.integral(&spec()).unwrap().value;
    assert!((dual_total - (3.0 + pi + 1.0 / 3.0) / 4.0).abs() < 1e-9, "{dual_total}");
    // The duality relation itself still holds at the endpoint.
    let dual_a0 = as_lambda_s(0.0, &dual, &spec()).unwrap().value;
    assert!((dual_a0 - a1).abs() < 1e-7 * a1, "{dual_a0} vs {a1}");
}

#[test]
fn duality_on_lambda_grid() {
    for s in [0.5, 1.0] {
        let fs = SConcaveFunction::profile(s, m1(1.5), 0.5, 1.0).unwrap();
        for lambda in [0.25, 0.5, 0.75] {
            let r = duality_s_check(lambda, &fs, &spec()).unwrap();
            assert!(r.comparison.passed(), "{s} {lambda}: {:?}", r.comparison);
            assert!(r.hessian_residual < 1e-4, "{}", r.hessian_residual);
            assert!(r.round_trip < 1e-5, "{}", r.round_trip);
            assert!(r.implicit_residual < 1e-6, "{}", r.implicit_residual);
        }
    }
}

#[test]
fn duality_in_two_dimensions() {
    let fs = SConcaveFunction::profile(0.5, DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]), 1.0, 1.0).unwrap();
    let r = duality_s_check(0.5, &fs, &spec()).unwrap();
    assert!(r.comparison.passed(), "{:?}", r.comparison);
    assert!(r.hessian_residual < 1e-4, "{}", r.hessian_residual);
}

#[test]
fn equality_family_half_duality() {
    let fs = SConcaveFunction::equality_family(0.5, &DMatrix::identity(2, 2)).unwrap();
    let r = duality_s_check(0.5, &fs, &spec()).unwrap();
    assert!(r.primal.value.is_finite() && r.primal.value > 0.0);
    assert!(r.comparison.passed(), "{:?}", r.comparison);
}

#[test]
fn holder_bounds() {
    let fs = SConcaveFunction::profile(0.5, m1(1.5), 0.75, 1.2).unwrap();
    for lambda in [0.0, 1.0] {
        let r = holder_s_check(lambda, &fs, &spec()).unwrap();
        assert!(r.comparison.passed(), "{lambda}: {:?}", r.comparison);
        assert!(r.comparison.margin.abs() < 1e-7, "{lambda}: {}", r.comparison.margin);
    }
    let half = holder_s_check(0.5, &fs, &spec()).unwrap();
    assert!(half.comparison.passed() && half.comparison.margin > 0.0, "{:?}", half.comparison);
    let beyond = holder_s_check(1.5, &fs, &spec()).unwrap();
    assert!(beyond.comparison.passed() && beyond.comparison.relation == Relation::AtLeast);
}

#[test]
fn equality_constant_normalizes() {
    for (n, s) in [(1, 0.5), (2, 0.5), (2, 1.0), (1, 0.25)] {
        let fs = SConcaveFunction::equality_family(s, &DMatrix::identity(n, n)).unwrap();
        let total = fs.integral(&spec()).unwrap();
        assert!((total.value - 1.0).abs() < 1e-8, "{n} {s}: {}", total.value);
    }
}

#[test]
fn s_logsob_equality_family() {
    for (n, s) in [(1, 0.5), (1, 1.0), (2, 0.5)] {
        let fs = SConcaveFunction::equality_family(s, &DMatrix::identity(n, n)).unwrap();
        let r = s_logsob_check(&fs, &spec()).unwrap();
        assert!((r.mass.value - 1.0).abs() < 1e-7, "{}", r.mass.value);
        assert!(r.comparison.passed(), "{:?}", r.comparison);
        assert!(r.comparison.margin.abs() <= 1e-3, "{n} {s}: {}", r.comparison.margin);
        assert!(r.santalo.passed(), "{:?}", r.santalo);
        assert!((r.santalo_product - r.santalo_bound).abs() < 1e-3 * r.santalo_bound);
    }
}

#[test]
fn s_logsob_equality_family_with_linear_map() {
    let a = DMatrix::from_row_slice(2, 2, &[1.5, 0.2, 0.2, 0.8]);
    let (fs, _) = SConcaveFunction::equality_family(0.5, &a).unwrap().renormalized(&spec()).unwrap();
    let r = s_logsob_check(&fs, &spec()).unwrap();
    assert!(r.comparison.margin.abs() <= 1e-3, "{}", r.comparison.margin);
}

#[test]
fn s_logsob_preconditions() {
    let fs = quartic_profile();
    assert!(matches!(s_logsob_check(&fs, &spec()), Err(Error::NotNormalized { .. })));
    let shifted: crate::convex_core::Oracle =
        Arc::new(QuadraticForm::new(m1(1.0), nalgebra::DVector::from_element(1, 0.3), 0.0).unwrap());
    let body: crate::bodies::Body = Arc::new(Ellipsoid::ball(1));
    let odd = SConcaveFunction::new(0.5, shifted, body, true).unwrap();
    assert!(matches!(s_logsob_check(&odd, &spec()), Err(Error::NotEven { .. })));
}

#[test]
fn s_logsob_strict_off_the_equality_family() {
    let (fs, _) = quartic_profile().renormalized(&spec()).unwrap();
    let r = s_logsob_check(&fs, &spec()).unwrap();
    assert!(r.comparison.strictly_satisfied(), "{:?}", r.comparison);
    assert!(r.santalo.strictly_satisfied(), "{:?}", r.santalo);
}

#[test]
fn s_logsob_tends_to_reverse_logsob() {
    // f_s = (1 - s x²)^{1/s} / Z tends to a Gaussian with variance 1/2.
    let m = m1(2.0);
    let q: crate::convex_core::Oracle = Arc::new(QuadraticForm::new(m.clone(), nalgebra::DVector::zeros(1), 0.0).unwrap());
    let mu = LogConcaveMeasure::new(q, &spec()).unwrap();
    let target = 2.0 * (gaussian_entropy(1) - shannon_entropy(&mu, &spec()).unwrap().value);
    let errors: Vec<f64> = [0.5, 0.25, 0.125]
        .iter()
        .map(|&s| {
            let (fs, _) = SConcaveFunction::profile(s, m.clone(), 1.0, 1.0).unwrap().renormalized(&spec()).unwrap();
            let r = s_logsob_check(&fs, &spec()).unwrap();
            (r.rhs - target).abs()
        })
        .collect();
    assert!(errors[2] < errors[1], "{errors:?}");
}

#[test]
fn as_lambda_s_tends_to_log_concave_value() {
    let m = m1(1.0);
    let q: crate::convex_core::Oracle = Arc::new(QuadraticForm::new(m.clone(), nalgebra::DVector::zeros(1), 0.0).unwrap());
    let target = crate::asa_log::as_lambda(0.5, q.as_ref(), &spec()).unwrap().value;
    let errors: Vec<f64> = [0.5, 0.25, 0.125, 0.0625]
        .iter()
        .map(|&s| {
            let fs = SConcaveFunction::profile(s, m.clone(), 1.0, 1.0).unwrap();
            (as_lambda_s(0.5, &fs, &spec()).unwrap().value - target).abs()
        })
        .collect();
    assert!(errors[3] < errors[2], "{errors:?}");
}

#[test]
fn lift_identity_at_p_one() {
    for fs in [
        SConcaveFunction::profile(1.0, m1(2.0), 1.0, 1.0).unwrap(),
        SConcaveFunction::profile(1.0, m1(2.0), 0.5, 1.0).unwrap(),
    ] {
        let r = lift_check(&fs, 1.0 / 3.0, &spec()).unwrap();
        assert!((r.p - 1.0).abs() < 1e-14);
        let rel = (r.functional.value - r.body.value).abs() / r.body.value;
        assert!(rel <= 2e-2, "{}: {} vs {}", fs.label(), r.functional.value, r.body.value);
    }
}

#[test]
fn lift_area_identity() {
    let fs = SConcaveFunction::profile(1.0, m1(2.0), 1.0, 1.0).unwrap();
    let r = lift_check(&fs, 0.0, &spec()).unwrap();
    let total = fs.integral(&spec()).unwrap().value;
    // as_0(K) = 2|K| with |K| = 2∫f, and the identity divides by |S^0| = 2.
    assert!((r.body.value - 2.0 * total).abs() < 1e-6, "{}", r.body.value);
    assert!((r.functional.value - 2.0 * total).abs() < 1e-6, "{}", r.functional.value);
}

#[test]
fn lift_of_half_power_profile_is_the_disk() {
    // f = (1 - x²)^{1/2} at s = 1 lifts to the unit disk; as_p(B) = 2π.
    let fs = SConcaveFunction::profile(1.0, m1(2.0), 0.5, 1.0).unwrap();
    let body: crate::bodies::Body = Arc::new(lift_body(&fs).unwrap());
    for u in [[1.0, 0.0], [0.6, 0.8], [0.0, -1.0]] {
        assert!((body.gauge(&u) - 1.0).abs() < 1e-12);
    }
    let asp = as_p_body(&body, 1.0, &spec()).unwrap();
    assert!((asp.value.value - 2.0 * std::f64::consts::PI).abs() < 1e-6, "{}", asp.value.value);
}

#[test]
fn lift_in_three_dimensions() {
    let fs = quartic_profile();
    let r = lift_check(&fs, 1.0 / 3.0, &spec()).unwrap();
    let rel = (r.functional.value - r.body.value).abs() / r.body.value;
    assert!(rel <= 2e-2, "{} vs {}", r.functional.value, r.body.value);
}

#[test]
fn lift_rejects_unsupported_s() {
    let fs = SConcaveFunction::profile(0.3, m1(1.0), 1.0, 1.0).unwrap();
    assert!(matches!(lift_body(&fs), Err(Error::UnsupportedS { .. })));
    let fs = SConcaveFunction::profile(1.0, DMatrix::identity(2, 2), 1.0, 1.0).unwrap();
    assert!(matches!(lift_body(&fs), Err(Error::UnsupportedS { .. })));
    let fs = SConcaveFunction::profile(1.0 / 3.0, m1(1.0), 1.0, 1.0).unwrap();
    assert!(matches!(lift_body(&fs), Err(Error::UnsupportedS { .. })));
}

#[test]
fn profile_invariants() {
    let fs = SConcaveFunction::profile(0.5, DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]), 0.5, 1.4).unwrap();
    let probes = fs.probe_points(200, 0.999, 9);
    assert!(fs.concavity_gap(&probes) <= 1e-12);
    assert!(fs.even_gap(&probes) <= EVEN_TOL);
    for x in &probes {
        assert!(1.0 - fs.s() * fs.psi().eval(x) > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn t_map_jacobian_matches_finite_differences(
        a in 0.5f64..3.0, b in 0.5f64..3.0, c in -0.3f64..0.3, alpha in 0.5f64..1.0,
        s in 0.2f64..1.0, t in 0.0f64..0.85, angle in 0.0f64..6.283,
    ) {
        let m = DMatrix::from_row_slice(2, 2, &[a, c, c, b]);
        let fs = SConcaveFunction::profile(s, m, alpha, 1.0).unwrap();
        let u = [angle.cos(), angle.sin()];
        let r = t * fs.support().radial(&u);
        let x = [r * u[0], r * u[1]];
        let tm = t_map(fs.psi().as_ref(), s, &x).unwrap();
        let h = 1e-6;
        let mut fd = DMatrix::zeros(2, 2);
        for j in 0..2 {
            let mut p = x;
            p[j] += h;
            let yp = t_map(fs.psi().as_ref(), s, &p).unwrap().y;
            p[j] -= 2.0 * h;
            let ym = t_map(fs.psi().as_ref(), s, &p).unwrap().y;
            for i in 0..2 {
                fd[(i, j)] = (yp[i] - ym[i]) / (2.0 * h);
            }
        }
        let scale = 1.0 + tm.differential.norm();
        prop_assert!((&fd - &tm.differential).norm() <= 1e-4 * scale);
        prop_assert!((fd.determinant() - tm.jacobian).abs() <= 1e-4 * (1.0 + tm.jacobian.abs()));
    }

    #[test]
    fn dual_hessian_product_identity(
        a in 0.5f64..3.0, alpha in 0.5f64..1.0, s in 0.2f64..1.0, t in -0.85f64..0.85,
    ) {
        let fs = SConcaveFunction::profile(s, m1(a), alpha, 1.0).unwrap();
        let x = [t * fs.support().radial(&[1.0])];
        let dual = fs.dual().unwrap();
        let y = t_map(fs.psi().as_ref(), s, &x).unwrap().y;
        let dj = dual.psi().jet(&y);
        let w = 1.0 - s * dj.value;
        let d_star = 1.0 + s * (dj.grad.unwrap()[0] * y[0] - dj.value);
        let product = fs.psi().hess(&x).unwrap()[(0, 0)] * (w / d_star).powi(3) * dj.hess.unwrap()[(0, 0)];
        prop_assert!((product - 1.0).abs() < 1e-4, "{}", product);
    }

    #[test]
    fn renormalized_profiles_integrate_to_one(a in 0.5f64..3.0, alpha in 0.5f64..1.0, c in 0.2f64..3.0) {
        let fs = SConcaveFunction::profile(0.5, m1(a), alpha, c).unwrap();
        let (norm, _) = fs.renormalized(&spec()).unwrap();
        prop_assert!((norm.integral(&spec()).unwrap().value - 1.0).abs() < 1e-9);
        let probes = fs.probe_points(10, 0.9, 1);
        for x in &probes {
            let ratio = norm.f(x) / fs.f(x);
            prop_assert!((ratio - norm.f(&probes[0]) / fs.f(&probes[0])).abs() < 1e-9 * ratio);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn perturbed_even_profiles_are_strict(a in 0.5f64..3.0, alpha in 0.6f64..0.95, s in 0.3f64..1.0) {
        let (fs, _) = SConcaveFunction::profile(s, m1(a), alpha, 1.0).unwrap().renormalized(&spec()).unwrap();
        let r = s_logsob_check(&fs, &spec()).unwrap();
        prop_assert!(r.comparison.strictly_satisfied(), "{:?}", r.comparison);
    }
}

