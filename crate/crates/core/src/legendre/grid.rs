use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::convex_core::{BoundingBox, ConvexFunction};
use crate::error::{Error, Result};

/// Uniform grid axis `min + i (max - min)/(count - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 || !(max > min) {
            return Err(Error::InvalidArgument(format!("grid axis [{min}, {max}] with {count} points")));
        }
        Ok(Self { min, max, count })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.max
        } else {
            self.min + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }
}

/// Grid samples of an extended-real function, row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub axes: Vec<GridAxis>,
    pub values: Vec<f64>,
}

/// How grid conjugation treats maximizers on the edge of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConjugateMode {
    /// Plain discrete maximum over the grid points.
    Discrete,
    /// `+inf` where the maximizer sits on the first or last grid index and
    /// the objective still rises outward by more than the slope margin, i.e.
    /// the conjugate of the function continued beyond the grid is infinite
    /// or cannot be resolved there.
    Extended,
}

const SLOPE_MARGIN: f64 = 1e-6;

impl GridFunction {
    pub fn new(axes: Vec<GridAxis>, values: Vec<f64>) -> Result<Self> {
        let n = axes.len();
        if n == 0 || n > 3 {
            return Err(Error::UnsupportedDimension { dim: n });
        }
        let total: usize = axes.iter().map(|a| a.count).product();
        if total != values.len() {
            return Err(Error::InvalidArgument(format!("{} values for a grid of {total}", values.len())));
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(Error::InvalidArgument("grid values must be finite or +inf".into()));
        }
        Ok(Self { axes, values })
    }

    /// Samples `f` on the grid.
    pub fn sample<F: Fn(&[f64]) -> f64>(axes: Vec<GridAxis>, f: F) -> Result<Self> {
        let total: usize = axes.iter().map(|a| a.count).product();
        let mut values = Vec::with_capacity(total);
        let mut x = vec![0.0; axes.len()];
        for flat in 0..total {
            let idx = unflatten(&axes, flat);
            for (d, i) in idx.iter().enumerate() {
                x[d] = axes[d].point(*i);
            }
            values.push(f(&x));
        }
        Self::new(axes, values)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        unflatten(&self.axes, flat)
            .iter()
            .enumerate()
            .map(|(d, i)| self.axes[d].point(*i))
            .collect()
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        self.values[flatten(&self.axes, idx)]
    }

    /// CSV: one `axis,<d>,<min>,<max>,<count>` line per axis, a `values`
    /// line, then the row-major values, one per line (`inf` allowed).
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (d, a) in self.axes.iter().enumerate() {
            let _ = writeln!(s, "axis,{d},{:e},{:e},{}", a.min, a.max, a.count);
        }
        s.push_str("values\n");
        for v in &self.values {
            if v.is_infinite() {
                s.push_str("inf\n");
            } else {
                let _ = writeln!(s, "{v:e}");
            }
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::InvalidArgument(format!("grid csv line {}: {msg}", line + 1));
        let mut axes = Vec::new();
        let mut values = Vec::new();
        let mut in_values = false;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if in_values {
                values.push(line.parse::<f64>().map_err(|_| bad(ln, "value is not a number"))?);
            } else if line == "values" {
                in_values = true;
            } else {
                let parts: Vec<&str> = line.split(',').map(str::trim).collect();
                if parts.len() != 5 || parts[0] != "axis" {
                    return Err(bad(ln, "expected axis,<index>,<min>,<max>,<count>"));
                }
                let d: usize = parts[1].parse().map_err(|_| bad(ln, "axis index"))?;
                if d != axes.len() {
                    return Err(bad(ln, "axes must be listed in order"));
                }
                let min = parts[2].parse().map_err(|_| bad(ln, "axis min"))?;
                let max = parts[3].parse().map_err(|_| bad(ln, "axis max"))?;
                let count = parts[4].parse().map_err(|_| bad(ln, "axis count"))?;
                axes.push(GridAxis::new(min, max, count)?);
            }
        }
        Self::new(axes, values)
    }
}

fn unflatten(axes: &[GridAxis], mut flat: usize) -> Vec<usize> {
    let mut idx = vec![0; axes.len()];
    for d in (0..axes.len()).rev() {
        idx[d] = flat % axes[d].count;
        flat /= axes[d].count;
    }
    idx
}

fn flatten(axes: &[GridAxis], idx: &[usize]) -> usize {
    idx.iter().zip(axes).fold(0, |acc, (i, a)| acc * a.count + i)
}

/// One-dimensional discrete conjugate `max_i (x_i y_j - phi_i)` for sorted
/// `y`, in `O(N + M)`: lower hull of the finite points, then a monotone
/// march over the hull as `y` increases. Returns values and the edge flags
/// used by [`ConjugateMode::Extended`].
fn conjugate_1d(x: &[f64], phi: &[f64], y: &[f64], out: &mut [f64], flags: &mut [bool]) {
    let last = x.len() - 1;
    let mut hull: Vec<usize> = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        if phi[i] == f64::INFINITY {
            continue;
        }
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Drop b if it lies on or above segment a-i.
            let lhs = (phi[b] - phi[a]) * (x[i] - x[a]);
            let rhs = (phi[i] - phi[a]) * (x[b] - x[a]);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    if hull.is_empty() {
        out.fill(f64::NEG_INFINITY);
        flags.fill(false);
        return;
    }
    let slope = |k: usize| (phi[hull[k + 1]] - phi[hull[k]]) / (x[hull[k + 1]] - x[hull[k]]);
    let mut k = 0;
    for (j, &yj) in y.iter().enumerate() {
        while k + 1 < hull.len() && slope(k) <= yj {
            k += 1;
        }
        let i = hull[k];
        out[j] = x[i] * yj - phi[i];
        let margin = SLOPE_MARGIN * (1.0 + yj.abs());
        flags[j] = hull.len() >= 2
            && ((i == last && k == hull.len() - 1 && yj - slope(k - 1) > margin)
                || (i == 0 && k == 0 && slope(0) - yj > margin));
    }
}

/// Discrete Legendre transform onto `dual_axes`, one linear-time pass per axis.
pub fn legendre_grid_on(g: &GridFunction, dual_axes: &[GridAxis], mode: ConjugateMode) -> Result<GridFunction> {
    let n = g.dim();
    if n > 3 {
        return Err(Error::UnsupportedDimension { dim: n });
    }
    if dual_axes.len() != n {
        return Err(Error::InvalidArgument("dual grid dimension mismatch".into()));
    }
    if g.values.iter().all(|v| *v == f64::INFINITY) {
        return Err(Error::EmptyDomain);
    }
    // Pass k conjugates axis n-1-k; later passes see phi = -h of the previous one.
    let mut shape: Vec<usize> = g.axes.iter().map(|a| a.count).collect();
    let mut cur = g.values.clone();
    for (pass, d) in (0..n).rev().enumerate() {
        let xs = g.axes[d].points();
        let ys = dual_axes[d].points();
        let mut new_shape = shape.clone();
        new_shape[d] = ys.len();
        let outer: usize = shape[..d].iter().product();
        let inner: usize = shape[d + 1..].iter().product();
        let mut next = vec![0.0; outer * ys.len() * inner];
        let mut phi = vec![0.0; xs.len()];
        let mut line_out = vec![0.0; ys.len()];
        let mut line_flag = vec![false; ys.len()];
        for o in 0..outer {
            for i in 0..inner {
                let mut poisoned = false;
                for (k, p) in phi.iter_mut().enumerate() {
                    let src = (o * shape[d] + k) * inner + i;
                    let v = cur[src];
                    *p = if pass == 0 { v } else { -v };
                    if pass > 0 && v == f64::INFINITY {
                        poisoned = true;
                    }
                }
                conjugate_1d(&xs, &phi, &ys, &mut line_out, &mut line_flag);
                for j in 0..ys.len() {
                    let dst = (o * ys.len() + j) * inner + i;
                    let flagged = mode == ConjugateMode::Extended && line_flag[j];
                    next[dst] = if poisoned || flagged { f64::INFINITY } else { line_out[j] };
                }
            }
        }
        cur = next;
        shape = new_shape;
    }
    GridFunction::new(dual_axes.to_vec(), cur)
}

/// Discrete Legendre transform on the same axes, extended convention.
pub fn legendre_grid(g: &GridFunction) -> Result<GridFunction> {
    legendre_grid_on(g, &g.axes.clone(), ConjugateMode::Extended)
}

/// Multilinear interpolation of a grid function as a convex oracle.
///
/// `+inf` outside the grid and in any cell touching a `+inf` vertex.
#[derive(Debug, Clone)]
pub struct GridOracle {
    grid: GridFunction,
    bbox: BoundingBox,
}

impl GridOracle {
    pub fn new(grid: GridFunction) -> Self {
        let bbox = BoundingBox::new(
            grid.axes.iter().map(|a| a.min).collect(),
            grid.axes.iter().map(|a| a.max).collect(),
        );
        Self { grid, bbox }
    }

    pub fn grid(&self) -> &GridFunction {
        &self.grid
    }
}

impl ConvexFunction for GridOracle {
    fn dim(&self) -> usize {
        self.grid.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut base = vec![0usize; n];
        let mut frac = vec![0.0; n];
        for d in 0..n {
            let a = &self.grid.axes[d];
            if x[d] < a.min || x[d] > a.max {
                return f64::INFINITY;
            }
            let t = (x[d] - a.min) / a.step();
            let i = (t.floor() as usize).min(a.count - 2);
            base[d] = i;
            frac[d] = t - i as f64;
        }
        let mut acc = 0.0;
        for corner in 0..1usize << n {
            let mut w = 1.0;
            let mut idx = base.clone();
            for d in 0..n {
                if corner >> d & 1 == 1 {
                    idx[d] += 1;
                    w *= frac[d];
                } else {
                    w *= 1.0 - frac[d];
                }
            }
            let v = self.grid.at(&idx);
            if v == f64::INFINITY {
                return f64::INFINITY;
            }
            acc += w * v;
        }
        acc
    }

    fn grad(&self, _x: &[f64]) -> Option<DVector<f64>> {
        None
    }

    fn hess(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }

    fn label(&self) -> String {
        format!("grid{}", self.dim())
    }
}
