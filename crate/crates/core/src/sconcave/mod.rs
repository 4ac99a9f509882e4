//! s-concave profiles `f = (1 - sψ)_+^{1/s}`: the s-Legendre dual, the map
//! `T_ψ`, the s-affine surface area `as_λ^{(s)}` and the lifted body `K_s(f)`.

mod checks;
mod dual;
mod lift;
mod profile;

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::bodies::{Body, Ellipsoid, Indicator, LinearImage};
use crate::convex_core::{gradient, hessian, Jet, Oracle, DEFAULT_DET_TOL};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_star, IntegrationResult, IntegrationSpec};

pub use checks::{
    duality_s_check, holder_s_check, s_logsob_check, s_logsob_constant, santalo_s_bound, HolderSReport, SDualityReport,
    SLogSobReport,
};
pub use dual::{psi_star_s, s_dual_at, t_map, SDual, SDualValue, TMap};
pub use lift::{lift_body, lift_check, LiftReport, RevolutionBody};
pub use profile::{RescaledPsi, SProfilePsi};

/// Largest `|f(x) - f(-x)|` accepted as even.
pub const EVEN_TOL: f64 = 1e-9;

/// `f = (1 - sψ)_+^{1/s}` on a convex support `S_f` with the origin inside.
#[derive(Debug, Clone)]
pub struct SConcaveFunction {
    s: f64,
    psi: Oracle,
    support: Body,
    smooth: bool,
}

impl SConcaveFunction {
    /// `smooth` declares `ψ` to be C² with invertible Hessian on `S_f` and
    /// `f^s -> 0` at the boundary of `S_f`.
    pub fn new(s: f64, psi: Oracle, support: Body, smooth: bool) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::UnsupportedS { s, reason: "s must be positive" });
        }
        if psi.dim() != support.dim() {
            return Err(Error::InvalidArgument(format!(
                "psi has dimension {} but the support {}",
                psi.dim(),
                support.dim()
            )));
        }
        let v0 = psi.eval(&vec![0.0; psi.dim()]);
        if !(v0.is_finite() && 1.0 - s * v0 > 0.0) {
            return Err(Error::EmptySupport);
        }
        Ok(Self { s, psi, support, smooth })
    }

    /// `f = c (1 - s <Mx,x>/2)_+^{α/s}`.
    pub fn profile(s: f64, m: DMatrix<f64>, alpha: f64, c: f64) -> Result<Self> {
        let support: Body = Arc::new(Ellipsoid::new(&m * (0.5 * s))?);
        let psi: Oracle = Arc::new(SProfilePsi::new(s, m, alpha, c)?);
        Self::new(s, psi, support, true)
    }

    /// `c₀ (1 - s|Ax|²)_+^{1/(2s)}`, with `c₀` normalizing the case `A = I`.
    pub fn equality_family(s: f64, a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        Self::profile(s, a.transpose() * a * 2.0, 0.5, equality_constant(n, s))
    }

    /// `f = 1_K`, so `ψ = 0` on `K`.
    pub fn indicator(s: f64, body: Body) -> Result<Self> {
        let psi: Oracle = Arc::new(Indicator::new(body.clone()));
        Self::new(s, psi, body, false)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn psi(&self) -> &Oracle {
        &self.psi
    }

    /// `S_f`.
    pub fn support(&self) -> &Body {
        &self.support
    }

    pub fn dim(&self) -> usize {
        self.psi.dim()
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    pub fn label(&self) -> String {
        self.psi.label()
    }

    pub fn f(&self, x: &[f64]) -> f64 {
        let v = self.psi.eval(x);
        if !v.is_finite() {
            return 0.0;
        }
        let u = 1.0 - self.s * v;
        if u > 0.0 {
            u.powf(1.0 / self.s)
        } else {
            0.0
        }
    }

    /// `(1/s) S_f°`, the support of `f°`.
    pub fn dual_support(&self) -> Result<Body> {
        let n = self.dim();
        Ok(Arc::new(LinearImage::new(
            DMatrix::identity(n, n) / self.s,
            self.support.polar()?,
        )?))
    }

    /// `f°` as an s-concave function carrying `ψ*_{(s)}`.
    pub fn dual(&self) -> Result<SConcaveFunction> {
        let support = self.dual_support()?;
        let psi: Oracle = Arc::new(SDual::new(self.clone(), support.clone()));
        Self::new(self.s, psi, support, self.smooth)
    }

    /// `∫ f`, in polar coordinates over `S_f`.
    pub fn integral(&self, spec: &IntegrationSpec) -> Result<IntegrationResult> {
        self.integrate(|x| self.f(x), spec)
    }

    /// `f / ∫f` and the integral it was divided by.
    pub fn renormalized(&self, spec: &IntegrationSpec) -> Result<(SConcaveFunction, IntegrationResult)> {
        let total = self.integral(spec)?;
        if !(total.value > 0.0) {
            return Err(Error::EmptySupport);
        }
        let psi: Oracle = Arc::new(RescaledPsi::new(self.psi.clone(), self.s, 1.0 / total.value));
        Ok((Self::new(self.s, psi, self.support.clone(), self.smooth)?, total))
    }

    /// `max |f(x) - f(-x)|` over the probes.
    pub fn even_gap(&self, probes: &[Vec<f64>]) -> f64 {
        probes
            .iter()
            .map(|x| {
                let m: Vec<f64> = x.iter().map(|v| -v).collect();
                (self.f(x) - self.f(&m)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest midpoint defect of `f^s`; zero for concave `f^s`.
    pub fn concavity_gap(&self, probes: &[Vec<f64>]) -> f64 {
        let fs = |x: &[f64]| self.f(x).powf(self.s);
        probes
            .windows(2)
            .map(|w| {
                let mid: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| 0.5 * (a + b)).collect();
                0.5 * (fs(&w[0]) + fs(&w[1])) - fs(&mid)
            })
            .fold(0.0, f64::max)
    }

    /// Largest `f` just inside the boundary of `S_f` over `count` directions;
    /// zero when `f^s -> 0` at the boundary.
    pub fn edge_value(&self, count: usize) -> f64 {
        let n = self.dim();
        let dirs: Vec<Vec<f64>> = match n {
            1 => vec![vec![1.0], vec![-1.0]],
            _ => (0..count.max(2))
                .map(|i| {
                    let a = 2.0 * std::f64::consts::PI * i as f64 / count.max(2) as f64;
                    let mut u = vec![0.0; n];
                    u[0] = a.cos();
                    u[1] = a.sin();
                    u
                })
                .collect(),
        };
        dirs.iter()
            .map(|u| {
                let r = (1.0 - 1e-9) * self.support.radial(u);
                self.f(&u.iter().map(|v| r * v).collect::<Vec<_>>())
            })
            .fold(0.0, f64::max)
    }

    /// Deterministic points of `S_f`, at most `reach` of the way to the boundary.
    pub fn probe_points(&self, count: usize, reach: f64, seed: u64) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let mut u: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
                let len = crate::convex_core::norm(&u).max(1e-12);
                u.iter_mut().for_each(|v| *v /= len);
                let r = reach * rng.random::<f64>() * self.support.radial(&u);
                u.iter().map(|v| r * v).collect()
            })
            .collect()
    }

    /// `∫_{S_f} g` in polar coordinates with tanh-sinh in the radius.
    pub(crate) fn integrate<G>(&self, g: G, spec: &IntegrationSpec) -> Result<IntegrationResult>
    where
        G: Fn(&[f64]) -> f64 + Sync,
    {
        let breaks = self.support.circle_breaks();
        integrate_star(
            g,
            self.dim(),
            |u| self.support.radial(u),
            (!breaks.is_empty()).then_some(breaks.as_slice()),
            spec,
        )
    }

    /// Value, gradient and Hessian at `x`, with finite differences where the
    /// oracle has no analytic derivatives.
    pub(crate) fn full_jet(&self, x: &[f64]) -> Option<Jet> {
        let mut j = self.psi.jet(x);
        if !j.value.is_finite() {
            return None;
        }
        if j.grad.is_none() {
            j.grad = gradient(self.psi.as_ref(), x).ok();
        }
        if j.hess.is_none() {
            j.hess = hessian(self.psi.as_ref(), x).ok();
        }
        (j.grad.is_some() && j.hess.is_some()).then_some(j)
    }
}

/// `c₀ = (π/s)^{-n/2} Γ(1 + n/2 + 1/(2s)) / Γ(1 + 1/(2s))`, the inverse of
/// `∫ (1 - s|x|²)_+^{1/(2s)} dx`.
pub fn equality_constant(n: usize, s: f64) -> f64 {
    let n = n as f64;
    let a = 1.0 + 0.5 / s;
    ((-0.5 * n) * (std::f64::consts::PI / s).ln() + ln_gamma(a + 0.5 * n) - ln_gamma(a)).exp()
}

/// `|S^{k-1}|`; `2` for `k = 1`.
pub fn sphere_measure(k: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(k as f64 / 2.0) / gamma(k as f64 / 2.0)
}

/// Integrand data of `as_λ^{(s)}` at a regular point.
struct SPoint {
    /// `1 - sψ`.
    u: f64,
    /// `1 + s(<x, ∇ψ> - ψ)`.
    d: f64,
    det: f64,
}

fn s_point(fs: &SConcaveFunction, x: &[f64]) -> Option<SPoint> {
    let j = fs.full_jet(x)?;
    let g = j.grad?;
    let h = j.hess?;
    let u = 1.0 - fs.s * j.value;
    let d = 1.0 + fs.s * (crate::convex_core::dot(x, g.as_slice()) - j.value);
    let det = h.determinant();
    (u > 0.0 && d > 0.0 && det >= DEFAULT_DET_TOL).then_some(SPoint { u, d, det })
}

/// Points with `||x||_{S_f}` above this bound may fail to evaluate and then
/// count as zero: the dual solver loses accuracy at the edge of its support.
const EDGE: f64 = 1.0 - 1e-9;

/// `as_λ^{(s)} = (1/(1+ns)) ∫_{X_ψ} (1-sψ)^{(1/s-1)(1-λ)} (det ∇²ψ)^λ
/// / (1 + s(<x,∇ψ> - ψ))^{λ(n+1/s+1)-1} dx`.
///
/// Points outside `X_ψ` are left out of the integral. `λ ∉ [0,1]` needs a
/// smooth profile.
pub fn as_lambda_s(lambda: f64, fs: &SConcaveFunction, spec: &IntegrationSpec) -> Result<IntegrationResult> {
    if !(0.0..=1.0).contains(&lambda) && !fs.smooth {
        return Err(Error::InvalidArgument(format!(
            "as_lambda^(s) with lambda = {lambda} needs a smooth profile"
        )));
    }
    let s = fs.s;
    let n = fs.dim() as f64;
    let e_u = (1.0 / s - 1.0) * (1.0 - lambda);
    let e_d = lambda * (n + 1.0 / s + 1.0) - 1.0;
    let norm = (1.0 + n * s).ln();
    fs.integrate(
        |x| match s_point(fs, x) {
            Some(p) => (e_u * p.u.ln() + lambda * p.det.ln() - e_d * p.d.ln() - norm).exp(),
            None if fs.support.gauge(x) > EDGE || fs.psi.eval(x).is_finite() => 0.0,
            None => f64::NAN,
        },
        spec,
    )
}

/// Density of `dμ = (1-sψ)^{1/s-1} (1 + s(<x,∇ψ> - ψ)) dx / (1+ns)`.
pub fn s_measure_density(fs: &SConcaveFunction, x: &[f64]) -> f64 {
    let n = fs.dim() as f64;
    match s_point(fs, x) {
        Some(p) => p.u.powf(1.0 / fs.s - 1.0) * p.d / (1.0 + n * fs.s),
        None => 0.0,
    }
}

#[cfg(test)]
mod tests;
