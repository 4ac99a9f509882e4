use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use super::*;
use crate::convex_core::{compose_linear, SmoothConvexFamily};

#[derive(Debug)]
struct Abs1 {
    bbox: BoundingBox,
}

impl ConvexFunction for Abs1 {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, x: &[f64]) -> f64 {
        x[0].abs()
    }
    fn grad(&self, x: &[f64]) -> Option<DVector<f64>> {
        Some(DVector::from_element(1, x[0].signum()))
    }
    fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }
    fn label(&self) -> String {
        "abs".into()
    }
}

fn abs1() -> Abs1 {
    Abs1 { bbox: BoundingBox::cube(1, 40.0) }
}

/// Dense-grid supremum of `<x,y> - psi(x)` with two zoom stages.
fn grid_sup(psi: &dyn ConvexFunction, y: &[f64]) -> f64 {
    let n = psi.dim();
    let b = psi.bounding_box();
    let mut lo = b.lo.clone();
    let mut hi = b.hi.clone();
    let m: usize = if n == 1 { 4001 } else { 201 };
    let mut best = f64::NEG_INFINITY;
    for _ in 0..6 {
        let mut arg = vec![0.0; n];
        let total = m.pow(n as u32);
        for k in 0..total {
            let mut c = k;
            let x: Vec<f64> = (0..n)
                .map(|d| {
                    let i = c % m;
                    c /= m;
                    lo[d] + (hi[d] - lo[d]) * i as f64 / (m - 1) as f64
                })
                .collect();
            let v = crate::convex_core::dot(&x, y) - psi.eval(&x);
            if v > best {
                best = v;
                arg = x;
            }
        }
        for d in 0..n {
            let w = 4.0 * (hi[d] - lo[d]) / (m - 1) as f64;
            lo[d] = arg[d] - w;
            hi[d] = arg[d] + w;
        }
    }
    best
}

#[test]
fn quadratic_duals() {
    let e = QuadraticForm::isotropic(2);
    let d = legendre_quadratic(&e);
    assert_eq!(d.matrix(), &DMatrix::<f64>::identity(2, 2));
    let q = QuadraticForm::diagonal(&[1.0, 4.0]).unwrap();
    let d = legendre_quadratic(&q);
    assert_relative_eq!(d.matrix()[(1, 1)], 0.25);
    for y in [[0.5, 1.0], [-2.0, 3.0]] {
        assert!((grid_sup(&q, &y) - d.eval(&y)).abs() < 1e-8);
    }
    assert_relative_eq!(legendre_quadratic(&q.with_offset(1.0)).offset(), -1.0);
}

#[test]
fn legendre_at_examples() {
    let s = LegendreSolver::default();
    let e = QuadraticForm::isotropic(2);
    let v = legendre_at(&e, &[3.0, 4.0], &s).unwrap();
    assert!((v.value - 12.5).abs() < 1e-10);
    assert!((v.argmax[0] - 3.0).abs() < 1e-8 && (v.argmax[1] - 4.0).abs() < 1e-8);
    let v = legendre_at(&abs1(), &[0.5], &s).unwrap();
    assert!(v.value.abs() < 1e-8, "{}", v.value);
    assert!(matches!(legendre_at(&abs1(), &[1.5], &s), Err(Error::Unbounded { .. })));
}

#[test]
fn legendre_at_matches_dense_grid() {
    for seed in 0..4u64 {
        for n in [1usize, 2] {
            let f = SmoothConvexFamily::seeded(n, seed);
            let y: Vec<f64> = (0..n).map(|i| 0.7 - 0.9 * i as f64 + 0.1 * seed as f64).collect();
            let v = legendre_at(&f, &y, &LegendreSolver::default()).unwrap();
            let g = grid_sup(&f, &y);
            assert!(v.value >= g - 1e-9, "n={n} seed={seed}: {} < {g}", v.value);
            assert!((v.value - g).abs() < 1e-6, "n={n} seed={seed}: {} vs {g}", v.value);
        }
    }
}

#[test]
fn smooth_dual_agrees_with_pointwise() {
    let f: Oracle = Arc::new(SmoothConvexFamily::seeded(2, 11));
    let d = SmoothDual::new(f.clone()).unwrap();
    for y in [[0.3, -0.2], [1.5, 0.9], [-2.0, 0.4]] {
        let a = d.eval(&y);
        let b = legendre_at(f.as_ref(), &y, &LegendreSolver::default()).unwrap().value;
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        // Hessian of the dual is the inverse Hessian at the preimage.
        let h = d.hess(&y).unwrap();
        let fd = crate::convex_core::fd_hessian(&d, &y, 1e-4).unwrap();
        assert!((h - fd).amax() < 1e-5);
    }
}

fn axis(l: f64, h: f64, m: usize) -> GridAxis {
    GridAxis::new(l, h, m).unwrap()
}

#[test]
fn grid_conjugate_of_half_square() {
    let ax = axis(-3.0, 3.0, 121);
    let g = GridFunction::sample(vec![ax.clone()], |x| 0.5 * x[0] * x[0]).unwrap();
    let c = legendre_grid(&g).unwrap();
    let h = ax.step();
    for (i, v) in c.values.iter().enumerate() {
        let y = ax.point(i);
        if y.abs() < 3.0 - h {
            assert!((v - 0.5 * y * y).abs() <= h * h, "y={y}: {v}");
        }
    }
    let g2 = GridFunction::sample(vec![axis(-2.0, 2.0, 41), axis(-2.0, 2.0, 41)], |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
    let c2 = legendre_grid(&g2).unwrap();
    for k in 0..c2.values.len() {
        let y = c2.point(k);
        if y[0].abs() >= 1.95 || y[1].abs() >= 1.95 {
            continue;
        }
        assert!((c2.values[k] - 0.5 * (y[0] * y[0] + y[1] * y[1])).abs() <= 0.02);
    }
}

#[test]
fn grid_conjugate_of_absolute_value() {
    let ax = axis(-2.0, 2.0, 81);
    let g = GridFunction::sample(vec![ax.clone()], |x| x[0].abs()).unwrap();
    let c = legendre_grid(&g).unwrap();
    let h = ax.step();
    for (i, v) in c.values.iter().enumerate() {
        let y = ax.point(i);
        if y.abs() <= 1.0 - h {
            assert!(v.abs() < 1e-12, "y={y}: {v}");
        } else if y.abs() >= 1.0 + h {
            assert_eq!(*v, f64::INFINITY, "y={y}");
        }
    }
}

#[test]
fn empty_grid_is_rejected() {
    let g = GridFunction::sample(vec![axis(0.0, 1.0, 5)], |_| f64::INFINITY).unwrap();
    assert!(matches!(legendre_grid(&g), Err(Error::EmptyDomain)));
}

#[test]
fn csv_round_trip() {
    let g = GridFunction::sample(vec![axis(-1.0, 1.0, 3), axis(0.0, 2.0, 4)], |x| {
        if x[1] > 1.5 {
            f64::INFINITY
        } else {
            x[0] * x[0] + x[1]
        }
    })
    .unwrap();
    let text = g.to_csv();
    assert!(text.starts_with("axis,0,"));
    let back = GridFunction::from_csv(&text).unwrap();
    assert_eq!(back, g);
    assert!(GridFunction::from_csv("axis,0,1,0,3\nvalues\n1\n2\n3\n").is_err());
}

#[test]
fn young_examples() {
    let e: Oracle = Arc::new(QuadraticForm::isotropic(2));
    let d = e.legendre_dual().unwrap();
    let r = young_check(&e, &d, &[(vec![1.0, 0.0], vec![1.0, 0.0]), (vec![1.0, 0.0], vec![0.0, 1.0])], 1e-12);
    assert!(r.passed(1e-12));
    assert_eq!(r.equality_checked, 2);
}

#[test]
fn young_on_seeded_family() {
    use rand::{Rng, SeedableRng};
    let f: Oracle = Arc::new(SmoothConvexFamily::seeded(2, 5));
    let d = dual_oracle(&f).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..1000)
        .map(|_| {
            let x = vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let y = vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            (x, y)
        })
        .collect();
    let r = young_check(&f, &d, &pairs, 1e-8);
    assert!(r.passed(1e-8), "{:?} {}", r.inequality_violations.first(), r.max_equality_gap);
}

#[test]
fn mccann_gaussian_cases() {
    let spec = IntegrationSpec::default().with_rel_tol(1e-9);
    let e: Oracle = Arc::new(QuadraticForm::isotropic(2));
    let d = e.legendre_dual().unwrap();
    let bump = |y: &[f64]| (-(y[0] - 0.5).powi(2) - 2.0 * (y[1] + 0.3).powi(2)).exp();
    let r = mccann_identity_check(&e, &d, bump, &spec).unwrap();
    assert!(r.residual < 1e-10, "{}", r.residual);

    let q: Oracle = Arc::new(QuadraticForm::diagonal(&[1.0, 4.0]).unwrap());
    let qd = q.legendre_dual().unwrap();
    let qd2 = qd.clone();
    let r = mccann_identity_check(&q, &qd, move |y| (-qd2.eval(y)).exp(), &spec).unwrap();
    let expected = 2.0 * PI * 2.0;
    assert!((r.direct.value - expected).abs() < 1e-8);
    assert!((r.pushforward.value - expected).abs() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn biconjugation_recovers_convex_grids(a in 0.2f64..3.0, b in -1.0f64..1.0, c in 0.0f64..2.0) {
        let ax = axis(-2.0, 2.0, 81);
        let f = |x: f64| a * x * x + b * x + c * x.abs();
        let g = GridFunction::sample(vec![ax.clone()], |x| f(x[0])).unwrap();
        let wide = axis(-20.0, 20.0, 801);
        let c1 = legendre_grid_on(&g, std::slice::from_ref(&wide), ConjugateMode::Discrete).unwrap();
        let c2 = legendre_grid_on(&c1, std::slice::from_ref(&ax), ConjugateMode::Discrete).unwrap();
        let h = ax.step().max(wide.step());
        for i in 0..ax.count {
            prop_assert!(c2.values[i] <= g.values[i] + 1e-12);
            prop_assert!(g.values[i] - c2.values[i] <= h * (4.0 * a + 2.0 + 2.0 * c), "i={}", i);
        }
    }

    #[test]
    fn biconjugate_is_below_nonconvex_grid(vals in proptest::collection::vec(-2.0f64..2.0, 21)) {
        let ax = axis(-1.0, 1.0, 21);
        let g = GridFunction::new(vec![ax.clone()], vals.clone()).unwrap();
        let c1 = legendre_grid_on(&g, &[axis(-500.0, 500.0, 20001)], ConjugateMode::Discrete).unwrap();
        let c2 = legendre_grid_on(&c1, std::slice::from_ref(&ax), ConjugateMode::Discrete).unwrap();
        for i in 0..21 {
            prop_assert!(c2.values[i] <= vals[i] + 1e-9);
        }
    }

    #[test]
    fn conjugation_reverses_order(shift in 0.0f64..1.0, bump in proptest::collection::vec(0.0f64..1.0, 15)) {
        let ax = axis(-1.5, 1.5, 15);
        let g1 = GridFunction::sample(vec![ax.clone(), ax.clone()], |x| x[0] * x[0] + x[1].abs()).unwrap();
        let values: Vec<f64> = g1.values.iter().enumerate().map(|(k, v)| v + shift + bump[k % 15]).collect();
        let g2 = GridFunction::new(g1.axes.clone(), values).unwrap();
        let c1 = legendre_grid_on(&g1, &g1.axes, ConjugateMode::Discrete).unwrap();
        let c2 = legendre_grid_on(&g2, &g1.axes, ConjugateMode::Discrete).unwrap();
        for (a, b) in c1.values.iter().zip(&c2.values) {
            prop_assert!(a >= b);
        }
    }

    #[test]
    fn pointwise_conjugate_is_midpoint_convex(seed in 0u64..200, y1 in -2.0f64..2.0, y2 in -2.0f64..2.0, z1 in -2.0f64..2.0, z2 in -2.0f64..2.0) {
        let f = SmoothConvexFamily::seeded(2, seed);
        let s = LegendreSolver::default();
        let a = legendre_at(&f, &[y1, z1], &s).unwrap().value;
        let b = legendre_at(&f, &[y2, z2], &s).unwrap().value;
        let m = legendre_at(&f, &[0.5 * (y1 + y2), 0.5 * (z1 + z2)], &s).unwrap().value;
        prop_assert!(m <= 0.5 * (a + b) + 1e-9);
    }

    #[test]
    fn conjugate_of_linear_image(seed in 0u64..200, e in proptest::collection::vec(-0.8f64..0.8, 4), y in proptest::collection::vec(-1.5f64..1.5, 2)) {
        let a = DMatrix::from_row_slice(2, 2, &e) + DMatrix::identity(2, 2) * 1.5;
        let f: Oracle = Arc::new(SmoothConvexFamily::seeded(2, seed));
        let fa = compose_linear(&f, &a).unwrap();
        let s = LegendreSolver::default();
        let lhs = legendre_at(fa.as_ref(), &y, &s).unwrap().value;
        let w = a.clone().try_inverse().unwrap().transpose() * DVector::from_column_slice(&y);
        let rhs = legendre_at(f.as_ref(), w.as_slice(), &s).unwrap().value;
        prop_assert!((lhs - rhs).abs() < 1e-7 * (1.0 + rhs.abs()), "{} vs {}", lhs, rhs);
    }
}
