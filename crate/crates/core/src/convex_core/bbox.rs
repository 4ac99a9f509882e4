use std::f64::consts::PI;

use super::{BoundingBox, ConvexFunction};
use crate::error::{Error, Result};

const MAX_RADIUS: f64 = 1e6;
const INFLATE: f64 = 0.15;

/// Deterministic direction set for ray searches on `S^{n-1}`.
///
/// All sign patterns in `{-1, 0, 1}^n` plus a uniform angular grid (n = 2)
/// or a Fibonacci lattice (n >= 3).
pub fn ray_directions(n: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    if n == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    if n <= 4 {
        let total = 3usize.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let v: Vec<f64> = (0..n)
                .map(|_| {
                    let d = (c % 3) as f64 - 1.0;
                    c /= 3;
                    d
                })
                .collect();
            let r = super::norm(&v);
            if r > 0.0 {
                dirs.push(v.iter().map(|x| x / r).collect());
            }
        }
    } else {
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut v = vec![0.0; n];
                v[i] = s;
                dirs.push(v);
            }
        }
    }
    if n == 2 {
        for k in 0..72 {
            let t = 2.0 * PI * (k as f64 + 0.5) / 72.0;
            dirs.push(vec![t.cos(), t.sin()]);
        }
    } else if n == 3 {
        let m = 240;
        let golden = PI * (3.0 - 5f64.sqrt());
        for k in 0..m {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / m as f64;
            let s = (1.0 - z * z).sqrt();
            let t = golden * k as f64;
            dirs.push(vec![s * t.cos(), s * t.sin(), z]);
        }
    }
    dirs
}

/// Box around `{psi <= psi(0) + level}` found by ray search from the origin.
///
/// Each ray is doubled until the level (or `+inf`) is reached, then bisected.
/// The hull of the hits is enlarged by 15% per side since the hits only
/// sample the level set from inside.
pub fn estimate_bounding_box<F: Fn(&[f64]) -> f64>(eval: F, n: usize, level: f64) -> Result<BoundingBox> {
    let origin = vec![0.0; n];
    let f0 = eval(&origin);
    if !f0.is_finite() {
        return Err(Error::InvalidArgument("ray search needs a finite value at the origin".into()));
    }
    let target = f0 + level;
    let mut lo = vec![0.0f64; n];
    let mut hi = vec![0.0f64; n];
    let mut x = vec![0.0; n];
    let mut at = |d: &[f64], r: f64| {
        for (xi, di) in x.iter_mut().zip(d) {
            *xi = r * di;
        }
        eval(&x)
    };
    for d in ray_directions(n) {
        let mut r_in = 0.0;
        let mut r_out = 1e-3;
        while !(at(&d, r_out) >= target) {
            r_in = r_out;
            r_out *= 2.0;
            if r_out > MAX_RADIUS {
                return Err(Error::Unbounded { direction: d });
            }
        }
        for _ in 0..60 {
            let mid = 0.5 * (r_in + r_out);
            if at(&d, mid) >= target {
                r_out = mid;
            } else {
                r_in = mid;
            }
        }
        for i in 0..n {
            let c = r_out * d[i];
            lo[i] = lo[i].min(c);
            hi[i] = hi[i].max(c);
        }
    }
    for i in 0..n {
        let w = hi[i] - lo[i];
        lo[i] -= INFLATE * w;
        hi[i] += INFLATE * w;
    }
    Ok(BoundingBox::new(lo, hi))
}

/// Ray-search box for an oracle at the crate truncation level.
pub(crate) fn oracle_box<F: ConvexFunction + ?Sized>(psi: &F, level: f64) -> Result<BoundingBox> {
    estimate_bounding_box(|x| psi.eval(x), psi.dim(), level)
}
