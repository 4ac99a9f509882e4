use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use statrs::function::gamma::gamma;

use super::tanh_sinh::TanhSinhRule;
use super::{rounding_floor, screen, IntegrationResult, IntegrationSpec, Method};
use crate::error::{Error, Result};

/// Surface measure of `S^{n-1}`.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0)
}

pub(crate) struct SpherePoint {
    pub u: Vec<f64>,
    pub w: f64,
    /// Weight bounding the truncated tanh-sinh tail next to this node (0 if interior).
    pub tail_weight: f64,
}

fn quadrant_breaks() -> Vec<f64> {
    (0..=4).map(|k| k as f64 * FRAC_PI_2).collect()
}

/// Product rule on `S^{n-1}` at a refinement level.
///
/// * `n = 2`: tanh-sinh in the angle on each arc between breakpoints.
/// * `n = 3`: tanh-sinh in the polar coordinate `z` (split at 0), trapezoid in azimuth.
/// * `n = 4`: `t = sin^2` of the Hopf angle by tanh-sinh, both phases by trapezoid.
pub(crate) fn sphere_rule(n: usize, level: u32, breaks: Option<&[f64]>) -> Result<Vec<SpherePoint>> {
    let mut pts = Vec::new();
    match n {
        1 => {
            pts.push(SpherePoint { u: vec![1.0], w: 1.0, tail_weight: 0.0 });
            pts.push(SpherePoint { u: vec![-1.0], w: 1.0, tail_weight: 0.0 });
        }
        2 => {
            let default = quadrant_breaks();
            let rule = TanhSinhRule::on_breakpoints(breaks.unwrap_or(&default), level);
            for i in 0..rule.len() {
                let th = rule.nodes[i];
                pts.push(SpherePoint {
                    u: vec![th.cos(), th.sin()],
                    w: rule.weights[i],
                    tail_weight: 2.0 * rule.edge_gap[i],
                });
            }
        }
        3 => {
            let zr = TanhSinhRule::on_breakpoints(&[-1.0, 0.0, 1.0], level);
            let m = 1usize << (level + 3);
            let dphi = 2.0 * PI / m as f64;
            for i in 0..zr.len() {
                let z = zr.nodes[i];
                let s = (1.0 - z * z).max(0.0).sqrt();
                for j in 0..m {
                    let phi = dphi * j as f64;
                    pts.push(SpherePoint {
                        u: vec![s * phi.cos(), s * phi.sin(), z],
                        w: zr.weights[i] * dphi,
                        tail_weight: 2.0 * zr.edge_gap[i] * dphi,
                    });
                }
            }
        }
        4 => {
            let tr = TanhSinhRule::new(0.0, 1.0, level);
            let m = 1usize << (level + 2);
            let dxi = 2.0 * PI / m as f64;
            for i in 0..tr.len() {
                let t = tr.nodes[i];
                let (c, s) = ((1.0 - t).max(0.0).sqrt(), t.max(0.0).sqrt());
                for j in 0..m {
                    let a = dxi * j as f64;
                    for k in 0..m {
                        let b = dxi * k as f64;
                        pts.push(SpherePoint {
                            u: vec![c * a.cos(), c * a.sin(), s * b.cos(), s * b.sin()],
                            w: 0.5 * tr.weights[i] * dxi * dxi,
                            tail_weight: tr.edge_gap[i] * dxi * dxi,
                        });
                    }
                }
            }
        }
        _ => return Err(Error::UnsupportedDimension { dim: n }),
    }
    Ok(pts)
}

pub(crate) fn max_level(n: usize) -> u32 {
    match n {
        2 => 8,
        3 => 6,
        _ => 5,
    }
}

/// Refines a point-set rule until successive levels agree.
pub(crate) fn refine<F>(
    point_value: F,
    n: usize,
    breaks: Option<&[f64]>,
    spec: &IntegrationSpec,
) -> Result<IntegrationResult>
where
    F: Fn(&SpherePoint) -> Result<(f64, f64, usize)> + Sync,
{
    let mut evals = 0;
    let mut prev: Option<f64> = None;
    let mut out = IntegrationResult {
        value: 0.0,
        error_estimate: f64::INFINITY,
        evals: 0,
        method: Method::TanhSinh,
        converged: false,
        clipped: 0,
    };
    let top = if n == 1 { 1 } else { max_level(n) };
    for level in 1..=top {
        let pts = sphere_rule(n, level, breaks)?;
        if prev.is_some() && evals + pts.len() > spec.budget {
            break;
        }
        let vals: Vec<Result<(f64, f64, usize)>> = pts.par_iter().map(&point_value).collect();
        let (mut sum, mut abs, mut tail, mut clipped, mut inner_evals) = (0.0, 0.0, 0.0, 0, 0);
        for (p, v) in pts.iter().zip(vals) {
            let (v, inner_err, used) = v?;
            inner_evals += used;
            if v.is_infinite() {
                clipped += 1;
                continue;
            }
            let t = p.w * v;
            sum += t;
            abs += t.abs() + p.w * inner_err;
            tail += p.w * inner_err;
            tail += p.tail_weight * v.abs();
        }
        evals += inner_evals;
        if n == 1 {
            return Ok(IntegrationResult {
                value: sum,
                error_estimate: tail + rounding_floor(abs, 2),
                evals,
                method: Method::TanhSinh,
                converged: true,
                clipped,
            });
        }
        let est = prev.map_or(f64::INFINITY, |p| (sum - p).abs()) + tail + rounding_floor(abs, pts.len());
        out = IntegrationResult {
            value: sum,
            error_estimate: est,
            evals,
            method: Method::TanhSinh,
            converged: prev.is_some() && spec.accepts(sum, est),
            clipped,
        };
        if out.converged {
            break;
        }
        prev = Some(sum);
    }
    Ok(out)
}

/// Integral of `h` over `S^{n-1}`, `n` in {2, 3, 4}.
pub fn integrate_sphere<F>(h: F, n: usize, spec: &IntegrationSpec) -> Result<IntegrationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if !(2..=4).contains(&n) {
        return Err(Error::UnsupportedDimension { dim: n });
    }
    refine(|p| Ok((value_or_clip(h(&p.u), &p.u)?, 0.0, 1)), n, None, spec)
}

/// Circle integral with extra breakpoints (angles in `[0, 2pi]`) at known kinks.
pub fn integrate_circle_with_breakpoints<F>(h: F, angles: &[f64], spec: &IntegrationSpec) -> Result<IntegrationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let breaks = merge_breaks(angles);
    refine(|p| Ok((value_or_clip(h(&p.u), &p.u)?, 0.0, 1)), 2, Some(&breaks), spec)
}

pub(crate) fn merge_breaks(angles: &[f64]) -> Vec<f64> {
    let mut b = quadrant_breaks();
    for a in angles {
        let t = a.rem_euclid(2.0 * PI);
        b.push(t);
    }
    b.sort_by(|x, y| x.total_cmp(y));
    b.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    b
}

fn value_or_clip(v: f64, u: &[f64]) -> Result<f64> {
    Ok(screen(v, u)?.unwrap_or(f64::INFINITY))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> IntegrationSpec {
        IntegrationSpec::default().with_rel_tol(1e-10).with_budget(5_000_000)
    }

    #[test]
    fn sphere_measures() {
        for (n, area) in [(2, 2.0 * PI), (3, 4.0 * PI), (4, 2.0 * PI * PI)] {
            let r = integrate_sphere(|_| 1.0, n, &spec()).unwrap();
            assert!((r.value - area).abs() < 1e-10, "n={n}: {}", r.value);
            assert!((sphere_area(n) - area).abs() < 1e-12);
        }
    }

    #[test]
    fn second_moment_on_s2() {
        let r = integrate_sphere(|u| u[0] * u[0], 3, &spec()).unwrap();
        assert!((r.value - 4.0 * PI / 3.0).abs() < 1e-9);
    }

    #[test]
    fn second_moment_on_s3() {
        let r = integrate_sphere(|u| u[2] * u[2], 4, &spec()).unwrap();
        assert!((r.value - PI * PI / 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn rejects_other_dimensions() {
        assert!(matches!(integrate_sphere(|_| 1.0, 5, &spec()), Err(Error::UnsupportedDimension { dim: 5 })));
        assert!(matches!(integrate_sphere(|_| 1.0, 1, &spec()), Err(Error::UnsupportedDimension { dim: 1 })));
    }

    #[test]
    fn kinked_integrand_with_breakpoints() {
        // |cos(theta - 0.3)| has kinks at 0.3 + pi/2 and 0.3 + 3pi/2.
        let r = integrate_circle_with_breakpoints(
            |u| (u[0] * 0.3f64.cos() + u[1] * 0.3f64.sin()).abs(),
            &[0.3 + FRAC_PI_2, 0.3 + 3.0 * FRAC_PI_2],
            &spec(),
        )
        .unwrap();
        assert!((r.value - 4.0).abs() < 1e-10);
    }
}
