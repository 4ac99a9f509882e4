use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_relative_eq;
use convexa::asa_log::{as_lambda, as_lambda_quadratic, euclidean_value};
use convexa::bodies::{as_p_body, volume, Body, Ellipsoid};
use convexa::legendre::dual_oracle;
use convexa::sconcave::{equality_constant, SConcaveFunction};
use convexa::{IntegrationSpec, Oracle, QuadraticForm};
use nalgebra::DMatrix;

fn spec() -> IntegrationSpec {
    IntegrationSpec::default().with_rel_tol(1e-8).with_budget(2_000_000)
}

#[test]
fn isotropic_gaussian_is_constant_in_lambda() {
    let q = QuadraticForm::isotropic(2);
    for l in [-0.5, 0.0, 0.5, 1.0] {
        let r = as_lambda(l, &q, &spec()).unwrap();
        assert_relative_eq!(r.value, euclidean_value(2), max_relative = 1e-7);
    }
}

#[test]
fn quadrature_matches_gaussian_closed_form() {
    let q = QuadraticForm::diagonal(&[1.0, 4.0]).unwrap();
    for l in [0.25, 0.75] {
        let r = as_lambda(l, &q, &spec()).unwrap();
        assert_relative_eq!(r.value, as_lambda_quadratic(&q, l), max_relative = 1e-6);
    }
}

#[test]
fn numeric_dual_of_quadratic_inverts_the_matrix() {
    let q: Oracle = Arc::new(QuadraticForm::diagonal(&[1.0, 4.0]).unwrap());
    let dual = dual_oracle(&q).unwrap();
    let y = [0.6, -1.2];
    assert_relative_eq!(dual.eval(&y), 0.5 * (y[0] * y[0] + y[1] * y[1] / 4.0), max_relative = 1e-8);
}

#[test]
fn disk_volume_and_surface_area() {
    let disk: Body = Arc::new(Ellipsoid::ball(2));
    assert_relative_eq!(volume(&disk, &spec()).unwrap().value, PI, max_relative = 1e-8);
    let asp = as_p_body(&disk, 1.0, &spec()).unwrap();
    assert_relative_eq!(asp.value.value, 2.0 * PI, max_relative = 1e-6);
}

#[test]
fn equality_profile_integrates_to_inverse_constant() {
    let s = 0.5;
    let f = SConcaveFunction::profile(s, DMatrix::identity(2, 2) * 2.0, 0.5, 1.0).unwrap();
    let r = f.integral(&spec()).unwrap();
    assert_relative_eq!(r.value * equality_constant(2, s), 1.0, max_relative = 1e-6);
}
