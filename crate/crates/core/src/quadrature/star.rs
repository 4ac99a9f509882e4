use super::sphere::refine;
use super::tanh_sinh::integrate_tanh_sinh;
use super::{IntegrationResult, IntegrationSpec};
use crate::error::{Error, Result};

/// Integral of `g` over the star-shaped set `{r u : 0 <= r <= radial(u)}`.
///
/// Polar coordinates: the sphere rule of [`super::integrate_sphere`] outside
/// and tanh-sinh in the radius inside, so singular behaviour at the
/// boundary of the set is integrated accurately. `n = 1` uses the two
/// directions `+1, -1`. `breaks` adds circle breakpoints for `n = 2`.
pub fn integrate_star<G, R>(g: G, n: usize, radial: R, breaks: Option<&[f64]>, spec: &IntegrationSpec) -> Result<IntegrationResult>
where
    G: Fn(&[f64]) -> f64 + Sync,
    R: Fn(&[f64]) -> f64 + Sync,
{
    if n == 0 || n > 4 {
        return Err(Error::UnsupportedDimension { dim: n });
    }
    let inner_spec = IntegrationSpec {
        rel_tol: (spec.rel_tol * 0.1).max(1e-14),
        abs_tol: spec.abs_tol * 0.1,
        budget: spec.budget.max(1000),
        ..spec.clone()
    };
    let merged = breaks.map(super::sphere::merge_breaks);
    refine(
        |p| {
            let rmax = radial(&p.u);
            if !(rmax > 0.0) || !rmax.is_finite() {
                return Err(Error::InvalidArgument(format!("radial function {rmax} at {:?}", p.u)));
            }
            let mut x = vec![0.0; n];
            let r = integrate_tanh_sinh(
                |r| {
                    for (xi, ui) in x.iter_mut().zip(&p.u) {
                        *xi = r * ui;
                    }
                    let v = g(&x);
                    if v == f64::INFINITY {
                        v
                    } else {
                        v * r.powi(n as i32 - 1)
                    }
                },
                0.0,
                rmax,
                &inner_spec,
            )?;
            Ok((r.value, r.error_estimate, r.evals))
        },
        n,
        merged.as_deref(),
        spec,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec() -> IntegrationSpec {
        IntegrationSpec::default().with_rel_tol(1e-9).with_budget(20_000_000)
    }

    #[test]
    fn interval_with_sqrt_edge() {
        // int_{-1}^{1} sqrt(1 - x^2) dx = pi / 2
        let r = integrate_star(|x| (1.0 - x[0] * x[0]).max(0.0).sqrt(), 1, |_| 1.0, None, &spec()).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn ellipse_area() {
        let r = integrate_star(
            |_| 1.0,
            2,
            |u| 1.0 / (u[0] * u[0] + u[1] * u[1] / 4.0).sqrt(),
            None,
            &spec(),
        )
        .unwrap();
        assert!((r.value - 2.0 * PI).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn ball_volume_3d() {
        let r = integrate_star(|_| 1.0, 3, |_| 1.0, None, &spec()).unwrap();
        assert!((r.value - 4.0 * PI / 3.0).abs() < 1e-9);
    }
}
