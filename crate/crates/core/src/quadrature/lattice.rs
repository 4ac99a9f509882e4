use rayon::prelude::*;

use super::gauss::composite;
use super::{rounding_floor, screen, AxisBox, IntegrationResult, IntegrationSpec, Method};
use crate::error::{Error, Result};

const NODES_PER_CELL: usize = 8;
const CELL_SEQUENCE: [usize; 16] = [1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256];

pub(crate) struct LevelSum {
    pub value: f64,
    pub abs_sum: f64,
    pub evals: usize,
    pub clipped: usize,
}

/// Tensor Gauss-Legendre sum with `cells` cells of `m` nodes per axis.
///
/// Work is split over the first axis; partial sums are combined in index
/// order so the result does not depend on the thread count.
pub(crate) fn tensor_sum<F>(g: &F, region: &AxisBox, cells: usize, m: usize) -> Result<LevelSum>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = region.dim();
    if n == 0 {
        return Err(Error::UnsupportedDimension { dim: 0 });
    }
    let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
        .map(|i| composite(region.lo[i], region.hi[i], cells, m))
        .collect();
    let per_axis = cells * m;
    let inner_count = per_axis.pow((n - 1) as u32);

    let rows: Vec<Result<(f64, f64, usize)>> = (0..per_axis)
        .into_par_iter()
        .map(|i0| {
            let mut x = vec![0.0; n];
            let mut idx = vec![0usize; n];
            x[0] = axes[0].0[i0];
            let w0 = axes[0].1[i0];
            let mut sum = 0.0;
            let mut abs = 0.0;
            let mut clipped = 0;
            for _ in 0..inner_count {
                let mut w = w0;
                for d in 1..n {
                    x[d] = axes[d].0[idx[d]];
                    w *= axes[d].1[idx[d]];
                }
                if let Some(v) = screen(g(&x), &x)? {
                    sum += w * v;
                    abs += (w * v).abs();
                } else {
                    clipped += 1;
                }
                for d in (1..n).rev() {
                    idx[d] += 1;
                    if idx[d] < per_axis {
                        break;
                    }
                    idx[d] = 0;
                }
            }
            Ok((sum, abs, clipped))
        })
        .collect();

    let mut out = LevelSum {
        value: 0.0,
        abs_sum: 0.0,
        evals: per_axis * inner_count,
        clipped: 0,
    };
    for row in rows {
        let (s, a, c) = row?;
        out.value += s;
        out.abs_sum += a;
        out.clipped += c;
    }
    Ok(out)
}

/// Composite Gauss-Legendre refinement on a box.
///
/// Cells per axis follow a fixed sequence; the error estimate is the change
/// between the two finest levels plus a rounding floor. Evaluations are
/// counted cumulatively against `spec.budget`.
pub fn integrate_lattice<F>(g: &F, region: &AxisBox, spec: &IntegrationSpec) -> Result<IntegrationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = region.dim();
    if n == 0 || n > 4 {
        return Err(Error::UnsupportedDimension { dim: n });
    }
    let m = nodes_for_budget(n, spec.budget);
    let cost = |k: usize| (k * m).pow(n as u32);

    let mut evals = 0usize;
    let mut prev: Option<f64> = None;
    let mut last = IntegrationResult {
        value: 0.0,
        error_estimate: f64::INFINITY,
        evals: 0,
        method: Method::Lattice,
        converged: false,
        clipped: 0,
    };
    for &k in CELL_SEQUENCE.iter() {
        if evals + cost(k) > spec.budget && prev.is_some() {
            break;
        }
        let level = tensor_sum(g, region, k, m)?;
        evals += level.evals;
        let floor = rounding_floor(level.abs_sum, level.evals);
        let est = match prev {
            Some(p) => (level.value - p).abs() + floor,
            None => f64::INFINITY,
        };
        last = IntegrationResult {
            value: level.value,
            error_estimate: est,
            evals,
            method: Method::Lattice,
            converged: prev.is_some() && spec.accepts(level.value, est),
            clipped: level.clipped,
        };
        if last.converged {
            break;
        }
        prev = Some(level.value);
    }
    Ok(last)
}

fn nodes_for_budget(n: usize, budget: usize) -> usize {
    // The first two levels (1 and 2 cells) must fit.
    let mut m = NODES_PER_CELL;
    while m > 2 && m.pow(n as u32) * (1 + (1usize << n)) > budget {
        m -= 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact_on_first_levels() {
        let spec = IntegrationSpec::default();
        let r = integrate_lattice(&|x: &[f64]| x[0] * x[0] * x[1], &AxisBox::new(vec![0.0, 0.0], vec![1.0, 2.0]), &spec)
            .unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-14);
        assert!(r.converged);
    }

    #[test]
    fn parallel_sum_is_reproducible() {
        let g = |x: &[f64]| (x[0] * 3.0).sin().exp() * (1.0 + x[1] * x[1]).ln() * x[2].cos();
        let region = AxisBox::cube(3, 1.5);
        let a = tensor_sum(&g, &region, 4, 8).unwrap();
        let b = tensor_sum(&g, &region, 4, 8).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn four_dimensional_gaussian() {
        let spec = IntegrationSpec::default().with_budget(8_000_000).with_rel_tol(1e-8);
        let r = integrate_lattice(
            &|x: &[f64]| (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp(),
            &AxisBox::cube(4, 9.0),
            &spec,
        )
        .unwrap();
        let expected = (2.0 * std::f64::consts::PI).powi(2);
        assert!((r.value / expected - 1.0).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn small_budget_shrinks_node_count() {
        assert_eq!(nodes_for_budget(1, 1000), 8);
        assert!(nodes_for_budget(4, 1000) < 8);
    }
}
