//! Resolution of fixture specs into oracles, bodies and s-concave profiles.

use std::collections::BTreeMap;
use std::sync::Arc;

use convexa::bodies::{Body, Ellipsoid, Gauge, PBall, Polytope};
use convexa::convex_core::{HingeSquared, PowerFunction};
use convexa::sconcave::SConcaveFunction;
use convexa::{Oracle, QuadraticForm, SmoothConvexFamily};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scenario::FixtureSpec;
use crate::CliError;

/// What a fixture is, as far as suites care.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureClass {
    Function,
    Body,
    SProfile,
    Pair,
}

impl FixtureClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            FixtureClass::Function => "function",
            FixtureClass::Body => "body",
            FixtureClass::SProfile => "s-profile",
            FixtureClass::Pair => "pair",
        }
    }
}

/// Closed-form data a body suite can compare against.
#[derive(Debug, Clone)]
pub enum Shape {
    /// `{<Mx, x> <= 1}`.
    Ellipsoid(DMatrix<f64>),
    Polytope,
    Other,
}

#[derive(Debug, Clone)]
pub enum Fixture {
    Function(Oracle),
    Body(Body, Shape),
    SProfile(SConcaveFunction),
    Pair(Oracle, Oracle),
}

impl Fixture {
    pub fn class(&self) -> FixtureClass {
        match self {
            Fixture::Function(_) => FixtureClass::Function,
            Fixture::Body(..) => FixtureClass::Body,
            Fixture::SProfile(_) => FixtureClass::SProfile,
            Fixture::Pair(..) => FixtureClass::Pair,
        }
    }
}

pub fn class_of(spec: &FixtureSpec) -> FixtureClass {
    match spec {
        FixtureSpec::Quadratic { .. }
        | FixtureSpec::RandomSpd { .. }
        | FixtureSpec::Seeded { .. }
        | FixtureSpec::Power { .. }
        | FixtureSpec::HingeSquared { .. }
        | FixtureSpec::Gauge { .. } => FixtureClass::Function,
        FixtureSpec::Ball { .. }
        | FixtureSpec::Ellipsoid { .. }
        | FixtureSpec::LqBall { .. }
        | FixtureSpec::Cube { .. }
        | FixtureSpec::Polygon { .. } => FixtureClass::Body,
        FixtureSpec::SProfile { .. } | FixtureSpec::SEquality { .. } => FixtureClass::SProfile,
        FixtureSpec::Pair { .. } => FixtureClass::Pair,
    }
}

fn bad(id: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Scenario(format!("fixtures.{id}: {msg}"))
}

fn matrix(id: &str, diag: &Option<Vec<f64>>, full: &Option<Vec<Vec<f64>>>) -> Result<DMatrix<f64>, CliError> {
    match (diag, full) {
        (Some(d), None) if !d.is_empty() => Ok(DMatrix::from_diagonal(&DVector::from_column_slice(d))),
        (None, Some(rows)) if !rows.is_empty() => {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(bad(id, "matrix must be square"));
            }
            Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
        }
        _ => Err(bad(id, "exactly one of `diag` and `matrix` is required")),
    }
}

/// Eigenvalues in `[0.5, 2]` under a random rotation.
fn random_spd(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let q = g.qr().q();
    let eig = DVector::from_fn(n, |_, _| rng.random_range(0.5..2.0));
    let a = &q * DMatrix::from_diagonal(&eig) * q.transpose();
    0.5 * (&a + a.transpose())
}

/// Builds fixture `id`; references are resolved recursively.
pub fn resolve(id: &str, specs: &BTreeMap<String, FixtureSpec>, seed: u64) -> Result<Fixture, CliError> {
    resolve_depth(id, specs, seed, 0)
}

fn resolve_depth(id: &str, specs: &BTreeMap<String, FixtureSpec>, seed: u64, depth: usize) -> Result<Fixture, CliError> {
    if depth > 4 {
        return Err(bad(id, "fixture references nest too deeply"));
    }
    let spec = specs.get(id).ok_or_else(|| bad(id, "unknown fixture"))?;
    let core = |e: convexa::Error| bad(id, e);
    let function = |r: &str| match resolve_depth(r, specs, seed, depth + 1)? {
        Fixture::Function(f) => Ok(f),
        other => Err(bad(id, format!("`{r}` is a {}, expected a function", other.class().as_str()))),
    };
    Ok(match spec {
        FixtureSpec::Quadratic {
            diag,
            matrix: full,
            center,
            offset,
        } => {
            let a = matrix(id, diag, full)?;
            let n = a.nrows();
            let c = match center {
                Some(c) if c.len() == n => DVector::from_column_slice(c),
                Some(_) => return Err(bad(id, "center has the wrong dimension")),
                None => DVector::zeros(n),
            };
            Fixture::Function(Arc::new(QuadraticForm::new(a, c, offset.unwrap_or(0.0)).map_err(core)?))
        }
        FixtureSpec::RandomSpd { dim, seed: own } => {
            let a = random_spd(*dim, own.unwrap_or(seed));
            Fixture::Function(Arc::new(QuadraticForm::new(a, DVector::zeros(*dim), 0.0).map_err(core)?))
        }
        FixtureSpec::Seeded { dim, seed } => {
            if *dim == 0 {
                return Err(bad(id, "dim must be positive"));
            }
            Fixture::Function(Arc::new(SmoothConvexFamily::seeded(*dim, *seed)))
        }
        FixtureSpec::Power { dim, exponent } => {
            Fixture::Function(Arc::new(PowerFunction::new(*dim, *exponent, 0.0).map_err(core)?))
        }
        FixtureSpec::HingeSquared {
            diag,
            weight,
            direction,
            bias,
            positive_side,
        } => {
            let base = QuadraticForm::diagonal(diag).map_err(core)?;
            let h = HingeSquared::new(base, *weight, direction.clone(), *bias, *positive_side).map_err(core)?;
            Fixture::Function(Arc::new(h))
        }
        FixtureSpec::Gauge { body } => match resolve_depth(body, specs, seed, depth + 1)? {
            Fixture::Body(b, _) => Fixture::Function(Arc::new(Gauge::new(b))),
            other => return Err(bad(id, format!("`{body}` is a {}, expected a body", other.class().as_str()))),
        },
        FixtureSpec::Ball { dim } => {
            if *dim == 0 {
                return Err(bad(id, "dim must be positive"));
            }
            Fixture::Body(Arc::new(Ellipsoid::ball(*dim)), Shape::Ellipsoid(DMatrix::identity(*dim, *dim)))
        }
        FixtureSpec::Ellipsoid { axes, matrix: full } => {
            let e = match (axes, full) {
                (Some(a), None) => Ellipsoid::axes(a).map_err(core)?,
                (None, Some(_)) => Ellipsoid::new(matrix(id, &None, full)?).map_err(core)?,
                _ => return Err(bad(id, "exactly one of `axes` and `matrix` is required")),
            };
            let m = e.matrix().clone();
            Fixture::Body(Arc::new(e), Shape::Ellipsoid(m))
        }
        FixtureSpec::LqBall { dim, q } => Fixture::Body(Arc::new(PBall::new(*dim, *q).map_err(core)?), Shape::Other),
        FixtureSpec::Cube { dim } => {
            if *dim == 0 {
                return Err(bad(id, "dim must be positive"));
            }
            Fixture::Body(Arc::new(Polytope::cube(*dim)), Shape::Polytope)
        }
        FixtureSpec::Polygon { vertices } => {
            Fixture::Body(Arc::new(Polytope::polygon(vertices).map_err(core)?), Shape::Polytope)
        }
        FixtureSpec::SProfile {
            s,
            alpha,
            scale,
            diag,
            matrix: full,
        } => {
            let m = matrix(id, diag, full)?;
            Fixture::SProfile(SConcaveFunction::profile(*s, m, *alpha, scale.unwrap_or(1.0)).map_err(core)?)
        }
        FixtureSpec::SEquality { s, diag, matrix: full } => {
            let a = matrix(id, diag, full)?;
            Fixture::SProfile(SConcaveFunction::equality_family(*s, &a).map_err(core)?)
        }
        FixtureSpec::Pair { first, second } => {
            let (a, b) = (function(first)?, function(second)?);
            if a.dim() != b.dim() {
                return Err(bad(id, "pair members differ in dimension"));
            }
            Fixture::Pair(a, b)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(entries: &[(&str, FixtureSpec)]) -> BTreeMap<String, FixtureSpec> {
        entries.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn random_spd_is_reproducible_and_positive() {
        let a = random_spd(3, 11);
        assert_eq!(a, random_spd(3, 11));
        let eig = a.symmetric_eigen().eigenvalues;
        assert!(eig.iter().all(|v| *v >= 0.5 - 1e-12 && *v <= 2.0 + 1e-12), "{eig}");
    }

    #[test]
    fn gauge_of_interval_is_absolute_value() {
        let specs = table(&[
            ("seg", FixtureSpec::LqBall { dim: 1, q: 2.0 }),
            ("abs", FixtureSpec::Gauge { body: "seg".into() }),
        ]);
        let Fixture::Function(f) = resolve("abs", &specs, 0).unwrap() else { panic!() };
        assert_eq!(f.eval(&[-0.75]), 0.75);
    }

    #[test]
    fn class_mismatch_names_the_fixture() {
        let specs = table(&[
            ("ball", FixtureSpec::Ball { dim: 2 }),
            ("pair", FixtureSpec::Pair { first: "ball".into(), second: "ball".into() }),
        ]);
        let err = resolve("pair", &specs, 0).unwrap_err().to_string();
        assert!(err.contains("fixtures.pair") && err.contains("body"), "{err}");
    }

    #[test]
    fn matrix_needs_exactly_one_form() {
        let specs = table(&[(
            "q",
            FixtureSpec::Quadratic {
                diag: None,
                matrix: None,
                center: None,
                offset: None,
            },
        )]);
        assert!(resolve("q", &specs, 0).unwrap_err().to_string().contains("diag"));
    }
}
