use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::gauss::gauss_legendre;
use super::{rounding_floor, screen, AxisBox, IntegrationResult, IntegrationSpec, Method};
use crate::error::{Error, Result};

const NODES: usize = 5;

struct Region {
    region: AxisBox,
    fine: f64,
    err: f64,
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Region {}
impl PartialOrd for Region {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Region {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

struct Tally {
    evals: usize,
    clipped: usize,
    abs_sum: f64,
}

fn apply<F: Fn(&[f64]) -> f64>(g: &F, rule: &Rule, b: &AxisBox, tally: &mut Tally) -> Result<f64> {
    let n = b.dim();
    let m = rule.nodes.len();
    let half: Vec<f64> = (0..n).map(|i| 0.5 * (b.hi[i] - b.lo[i])).collect();
    let mid = b.center();
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    let mut sum = 0.0;
    for _ in 0..m.pow(n as u32) {
        let mut w = 1.0;
        for d in 0..n {
            x[d] = mid[d] + half[d] * rule.nodes[idx[d]];
            w *= half[d] * rule.weights[idx[d]];
        }
        tally.evals += 1;
        match screen(g(&x), &x)? {
            Some(v) => {
                sum += w * v;
                tally.abs_sum += (w * v).abs();
            }
            None => tally.clipped += 1,
        }
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < m {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok(sum)
}

fn children(b: &AxisBox) -> Vec<AxisBox> {
    let mid = b.center();
    let n = b.dim();
    (0..1usize << n)
        .map(|mask| {
            let mut lo = b.lo.clone();
            let mut hi = b.hi.clone();
            for d in 0..n {
                if mask >> d & 1 == 1 {
                    lo[d] = mid[d];
                } else {
                    hi[d] = mid[d];
                }
            }
            AxisBox::new(lo, hi)
        })
        .collect()
}

fn evaluate<F: Fn(&[f64]) -> f64>(g: &F, rule: &Rule, b: AxisBox, tally: &mut Tally) -> Result<Region> {
    let coarse = apply(g, rule, &b, tally)?;
    let mut fine = 0.0;
    for c in children(&b) {
        fine += apply(g, rule, &c, tally)?;
    }
    Ok(Region {
        region: b,
        fine,
        err: (fine - coarse).abs(),
    })
}

/// Globally adaptive bisection: the region with the largest
/// parent-versus-children discrepancy is split next.
pub fn integrate_adaptive<F>(g: &F, region: &AxisBox, spec: &IntegrationSpec) -> Result<IntegrationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = region.dim();
    if n == 0 || n > 4 {
        return Err(Error::UnsupportedDimension { dim: n });
    }
    let (nodes, weights) = gauss_legendre(NODES);
    let rule = Rule { nodes, weights };
    let per_region = (1 + (1usize << n)) * NODES.pow(n as u32);
    let mut tally = Tally {
        evals: 0,
        clipped: 0,
        abs_sum: 0.0,
    };
    let mut heap = BinaryHeap::new();
    heap.push(evaluate(g, &rule, region.clone(), &mut tally)?);

    let summarize = |heap: &BinaryHeap<Region>, tally: &Tally| {
        // Summation in a fixed order keeps the result reproducible.
        let mut regions: Vec<&Region> = heap.iter().collect();
        regions.sort_by(|a, b| {
            a.region
                .lo
                .iter()
                .zip(&b.region.lo)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        });
        let value: f64 = regions.iter().map(|r| r.fine).sum();
        let err: f64 = regions.iter().map(|r| r.err).sum::<f64>()
            + rounding_floor(tally.abs_sum / 2.0, tally.evals);
        (value, err)
    };

    loop {
        let (value, err) = summarize(&heap, &tally);
        let converged = spec.accepts(value, err);
        let children_cost = (1usize << n) * per_region;
        if converged || tally.evals + children_cost > spec.budget {
            return Ok(IntegrationResult {
                value,
                error_estimate: err,
                evals: tally.evals,
                method: Method::Adaptive,
                converged,
                clipped: tally.clipped,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        for c in children(&worst.region) {
            heap.push(evaluate(g, &rule, c, &mut tally)?);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolves_a_kink() {
        let spec = IntegrationSpec::default().with_rel_tol(1e-8).with_budget(200_000);
        let r = integrate_adaptive(&|x: &[f64]| (x[0] - 0.3).abs(), &AxisBox::cube(1, 1.0), &spec).unwrap();
        // int_{-1}^{1} |x - 0.3| dx = (1.3^2 + 0.7^2) / 2
        assert!((r.value - 1.09).abs() < 1e-8, "{}", r.value);
        assert!(r.converged);
    }

    #[test]
    fn disc_area() {
        let spec = IntegrationSpec::default().with_rel_tol(1e-4).with_budget(2_000_000);
        let r = integrate_adaptive(
            &|x: &[f64]| if x[0] * x[0] + x[1] * x[1] <= 1.0 { 1.0 } else { 0.0 },
            &AxisBox::cube(2, 1.0),
            &spec,
        )
        .unwrap();
        assert!((r.value - std::f64::consts::PI).abs() < 1e-3, "{}", r.value);
    }
}
