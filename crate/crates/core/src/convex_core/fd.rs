use nalgebra::{DMatrix, DVector};

use super::{norm, ConvexFunction, DomainStatus};
use crate::error::{Error, Result};

pub const DEFAULT_DET_TOL: f64 = 1e-10;

/// Default finite-difference step at `x`.
pub fn fd_step(x: &[f64]) -> f64 {
    (1e-4 * (1.0 + norm(x))).max(1e-5)
}

fn probe<F: ConvexFunction + ?Sized>(psi: &F, x: &[f64]) -> Result<f64> {
    let v = psi.eval(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::OutsideDomain { point: x.to_vec() })
    }
}

/// Central-difference gradient with step `h`.
pub fn fd_gradient<F: ConvexFunction + ?Sized>(psi: &F, x: &[f64], h: f64) -> Result<DVector<f64>> {
    let n = x.len();
    let mut p = x.to_vec();
    let mut g = DVector::zeros(n);
    for i in 0..n {
        p[i] = x[i] + h;
        let fp = probe(psi, &p)?;
        p[i] = x[i] - h;
        let fm = probe(psi, &p)?;
        p[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

/// Central-difference Hessian with step `h`, symmetrized.
///
/// Differences the analytic gradient when one exists, the values otherwise.
pub fn fd_hessian<F: ConvexFunction + ?Sized>(psi: &F, x: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let n = x.len();
    let mut p = x.to_vec();
    let mut hm = DMatrix::zeros(n, n);
    if psi.grad(x).is_some() {
        for i in 0..n {
            p[i] = x[i] + h;
            probe(psi, &p)?;
            let gp = psi.grad(&p).ok_or_else(|| Error::OutsideDomain { point: p.clone() })?;
            p[i] = x[i] - h;
            probe(psi, &p)?;
            let gm = psi.grad(&p).ok_or_else(|| Error::OutsideDomain { point: p.clone() })?;
            p[i] = x[i];
            for j in 0..n {
                hm[(i, j)] = (gp[j] - gm[j]) / (2.0 * h);
            }
        }
    } else {
        let f0 = probe(psi, x)?;
        for i in 0..n {
            p[i] = x[i] + h;
            let fp = probe(psi, &p)?;
            p[i] = x[i] - h;
            let fm = probe(psi, &p)?;
            p[i] = x[i];
            hm[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
            for j in 0..i {
                let mut q = x.to_vec();
                let mut corner = |si: f64, sj: f64| -> Result<f64> {
                    q[i] = x[i] + si * h;
                    q[j] = x[j] + sj * h;
                    probe(psi, &q)
                };
                let v = (corner(1.0, 1.0)? - corner(1.0, -1.0)? - corner(-1.0, 1.0)? + corner(-1.0, -1.0)?) / (4.0 * h * h);
                hm[(i, j)] = v;
                hm[(j, i)] = v;
            }
        }
    }
    Ok(0.5 * (&hm + hm.transpose()))
}

/// Analytic gradient, or the finite-difference one at the default step.
pub fn gradient<F: ConvexFunction + ?Sized>(psi: &F, x: &[f64]) -> Result<DVector<f64>> {
    match psi.grad(x) {
        Some(g) => Ok(g),
        None => fd_gradient(psi, x, fd_step(x)),
    }
}

/// Analytic Hessian, or the finite-difference one at the default step.
pub fn hessian<F: ConvexFunction + ?Sized>(psi: &F, x: &[f64]) -> Result<DMatrix<f64>> {
    match psi.hess(x) {
        Some(h) => Ok(h),
        None => fd_hessian(psi, x, fd_step(x)),
    }
}

/// Membership in the regular set: the Hessian exists and `det >= det_tol`.
///
/// Without an analytic Hessian, existence is judged by agreement of the
/// finite-difference Hessian at steps `h` and `2h`; a kink inside the stencil
/// makes them disagree.
pub fn in_regular_set<F: ConvexFunction + ?Sized>(psi: &F, x: &[f64], det_tol: f64) -> bool {
    if psi.domain(x) != DomainStatus::Interior {
        return false;
    }
    if let Some(h) = psi.hess(x) {
        return h.determinant() >= det_tol;
    }
    let h = fd_step(x);
    let (Ok(h1), Ok(h2)) = (fd_hessian(psi, x, h), fd_hessian(psi, x, 2.0 * h)) else {
        return false;
    };
    let scale = h1.norm().max(h2.norm()).max(1.0);
    if (&h1 - &h2).norm() > 1e-2 * scale {
        return false;
    }
    h1.determinant() >= det_tol
}

/// Fraction of `points` in the regular set.
pub fn regular_fraction<F: ConvexFunction + ?Sized>(psi: &F, points: &[Vec<f64>], det_tol: f64) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let hits = points.iter().filter(|x| in_regular_set(psi, x, det_tol)).count();
    hits as f64 / points.len() as f64
}
