//! The verification suites and the rows each one emits.

use std::fmt;

use convexa::asa_log::{
    as_lambda, duality_residual, isoperimetric_check, log_convexity_check, santalo_product, valuation_check, WeightPair,
};
use convexa::bodies::{
    as_p_body, asp_duality_check, ball_volume, lp_isoperimetric_check, theorem_norm_check, volume, Body,
};
use convexa::convex_core::{compose_linear, dot};
use convexa::entropy::{logsob_improved_check, reverse_logsob_check, LogConcaveMeasure};
use convexa::legendre::{dual_oracle, mccann_identity_check, young_check};
use convexa::sconcave::{as_lambda_s, duality_s_check, holder_s_check, lift_check, s_logsob_check, SConcaveFunction};
use convexa::{Comparison, Error, IntegrationSpec, Oracle, Relation, ReportRow, Verdict};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fixtures::{Fixture, FixtureClass, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteId {
    Legendre,
    Mccann,
    AsaDuality,
    Isoperimetric,
    Santalo,
    RevLogsob,
    Logsob,
    Bodies,
    TheoremNorm,
    SconcaveDuality,
    SLogsob,
    LiftBody,
    Valuation,
}

impl SuiteId {
    pub const ALL: [SuiteId; 13] = [
        SuiteId::Legendre,
        SuiteId::Mccann,
        SuiteId::AsaDuality,
        SuiteId::Isoperimetric,
        SuiteId::Santalo,
        SuiteId::RevLogsob,
        SuiteId::Logsob,
        SuiteId::Bodies,
        SuiteId::TheoremNorm,
        SuiteId::SconcaveDuality,
        SuiteId::SLogsob,
        SuiteId::LiftBody,
        SuiteId::Valuation,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SuiteId::Legendre => "legendre",
            SuiteId::Mccann => "mccann",
            SuiteId::AsaDuality => "asa-duality",
            SuiteId::Isoperimetric => "isoperimetric",
            SuiteId::Santalo => "santalo",
            SuiteId::RevLogsob => "rev-logsob",
            SuiteId::Logsob => "logsob",
            SuiteId::Bodies => "bodies",
            SuiteId::TheoremNorm => "theorem-norm",
            SuiteId::SconcaveDuality => "sconcave-duality",
            SuiteId::SLogsob => "s-logsob",
            SuiteId::LiftBody => "lift-body",
            SuiteId::Valuation => "valuation",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.as_str() == name)
    }

    pub fn description(&self) -> &'static str {
        match self {
            SuiteId::Legendre => "Young's inequality and its equality case against the numerical conjugate",
            SuiteId::Mccann => "change of variables through the gradient map with f = exp(-psi*)",
            SuiteId::AsaDuality => "as_lambda(psi) = as_(1-lambda)(psi*), log-convexity in lambda, linear-map homogeneity",
            SuiteId::Isoperimetric => "functional affine isoperimetric inequality after centering",
            SuiteId::Santalo => "functional Blaschke-Santalo product and the as_lambda products",
            SuiteId::RevLogsob => "reverse log-Sobolev inequality and the boundary bound",
            SuiteId::Logsob => "improved log-Sobolev inequality and the classical form",
            SuiteId::Bodies => "L_p affine surface area of bodies: closed forms, polar duality, isoperimetry",
            SuiteId::TheoremNorm => "as_lambda of the half squared gauge against as_p of the body",
            SuiteId::SconcaveDuality => "s-concave duality, endpoint identities and Holder bounds",
            SuiteId::SLogsob => "s-log-Sobolev inequality with the s-Santalo bound",
            SuiteId::LiftBody => "s-concave affine surface area against as_p of the lifted body",
            SuiteId::Valuation => "valuation identity for pairs with a convex minimum",
        }
    }

    pub fn fixture_class(&self) -> FixtureClass {
        match self {
            SuiteId::Bodies | SuiteId::TheoremNorm => FixtureClass::Body,
            SuiteId::SconcaveDuality | SuiteId::SLogsob | SuiteId::LiftBody => FixtureClass::SProfile,
            SuiteId::Valuation => FixtureClass::Pair,
            _ => FixtureClass::Function,
        }
    }

    /// Grid of λ used when neither the scenario nor the flags give one; empty
    /// for suites without a λ parameter.
    pub fn default_lambdas(&self) -> Vec<f64> {
        match self {
            SuiteId::AsaDuality => (1..=9).map(|k| k as f64 / 10.0).collect(),
            SuiteId::Isoperimetric => vec![-0.25, 0.0, 0.1, 0.25, 0.4, 0.5],
            SuiteId::Santalo => vec![0.25, 0.5],
            SuiteId::SconcaveDuality => vec![0.25, 0.5, 0.75],
            SuiteId::LiftBody => vec![0.0, 1.0 / 3.0],
            SuiteId::Valuation => vec![0.25, 0.5],
            _ => Vec::new(),
        }
    }

    pub fn takes_lambdas(&self) -> bool {
        !self.default_lambdas().is_empty()
    }

    pub fn default_ps(&self) -> Vec<f64> {
        match self {
            SuiteId::Bodies => vec![0.0, 1.0, 2.0, 10.0],
            SuiteId::TheoremNorm => vec![0.0, 1.0, 2.0],
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One suite applied to one fixture.
#[derive(Debug, Clone)]
pub struct Task {
    pub suite: SuiteId,
    pub fixture_id: String,
    pub fixture: Fixture,
    pub lambdas: Vec<f64>,
    pub ps: Vec<f64>,
    pub maps: usize,
    pub log_convexity: bool,
    pub spec: IntegrationSpec,
}

/// A point of `λ -> log as_λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub suite: SuiteId,
    pub fixture: String,
    pub lambda: f64,
    pub log_value: f64,
    pub log_error: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TaskOutput {
    pub rows: Vec<ReportRow>,
    pub profile: Vec<ProfilePoint>,
    pub notes: Vec<String>,
}

/// Parameters attached to a row.
#[derive(Debug, Clone, Copy, Default)]
struct Params {
    lambda: Option<f64>,
    p: Option<f64>,
    s: Option<f64>,
}

impl Params {
    fn lambda(l: f64) -> Self {
        Self {
            lambda: Some(l),
            ..Self::default()
        }
    }
    fn p(p: f64) -> Self {
        Self {
            p: Some(p),
            ..Self::default()
        }
    }
    fn s(s: f64) -> Self {
        Self {
            s: Some(s),
            ..Self::default()
        }
    }
    fn with_s(mut self, s: f64) -> Self {
        self.s = Some(s);
        self
    }
}

/// Floor on tolerances of comparisons whose sides both come from quadrature
/// of non-polynomial boundary data.
const BODY_TOL: f64 = 1e-6;
const S_TOL: f64 = 1e-6;
/// Relative floor for Young's inequality on sampled pairs.
const YOUNG_TOL: f64 = 1e-8;
/// Equality gap `ψ*(∇ψ(x)) = <x,∇ψ(x)> - ψ(x)` at regular points.
const YOUNG_EQUALITY_TOL: f64 = 1e-6;
const YOUNG_PAIRS: usize = 64;
const LOG_CONVEXITY_TOL: f64 = 1e-9;
const HOMOGENEITY_LAMBDAS: [f64; 3] = [-0.25, 0.3, 0.8];
/// Relative floor for `as_λ(ψ∘A) / as_λ(ψ)`; negative λ puts a singular
/// Hessian power under the integral whenever `∇²ψ` degenerates.
const HOMOGENEITY_TOL: f64 = 1e-2;
/// Pointwise probes of the s-duality: analytic Hessian product, inverse
/// map, implicit relation to the classical conjugate.
const HESSIAN_IDENTITY_TOL: f64 = 1e-4;
const ROUND_TRIP_TOL: f64 = 1e-5;
const IMPLICIT_TOL: f64 = 1e-6;
/// `f°` counts as vanishing on the boundary of its support below this.
const DUAL_EDGE_TOL: f64 = 1e-3;

struct Emitter<'a> {
    task: &'a Task,
    out: TaskOutput,
}

impl<'a> Emitter<'a> {
    fn label(&self, check: &str) -> String {
        if check.is_empty() {
            self.task.fixture_id.clone()
        } else {
            format!("{}:{check}", self.task.fixture_id)
        }
    }

    fn push(&mut self, check: &str, params: Params, c: &Comparison) {
        let mut row = ReportRow::from_comparison(self.task.suite.as_str(), &self.label(check), c);
        row.lambda = params.lambda;
        row.p = params.p;
        row.s = params.s;
        self.out.rows.push(row);
    }

    /// Errors that mean the hypotheses of a check are not met become flagged
    /// rows; anything else is a failure.
    fn error(&mut self, check: &str, params: Params, err: &Error) {
        let verdict = match err {
            Error::DegenerateHessian { .. }
            | Error::NotEven { .. }
            | Error::NotNormalized { .. }
            | Error::UnsupportedS { .. }
            | Error::UnsupportedExponent { .. }
            | Error::NotAValuationInstance { .. }
            | Error::FlatPoint { .. }
            | Error::OriginNotInterior => Verdict::Flagged,
            _ => Verdict::Fail,
        };
        let label = self.label(check);
        self.out.notes.push(format!("{}/{label}: {err}", self.task.suite));
        self.out.rows.push(ReportRow {
            suite: self.task.suite.as_str().to_string(),
            fixture: label,
            lambda: params.lambda,
            p: params.p,
            s: params.s,
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            error_budget: f64::NAN,
            verdict,
        });
    }

    fn profile(&mut self, lambda: f64, log_value: f64, log_error: f64) {
        self.out.profile.push(ProfilePoint {
            suite: self.task.suite,
            fixture: self.task.fixture_id.clone(),
            lambda,
            log_value,
            log_error,
        });
    }
}

/// Runs every check of the task's suite on its fixture.
pub fn run_task(task: &Task) -> TaskOutput {
    let mut em = Emitter {
        task,
        out: TaskOutput::default(),
    };
    match (&task.fixture, task.suite) {
        (Fixture::Function(psi), SuiteId::Legendre) => legendre(&mut em, psi),
        (Fixture::Function(psi), SuiteId::Mccann) => mccann(&mut em, psi),
        (Fixture::Function(psi), SuiteId::AsaDuality) => asa_duality(&mut em, psi),
        (Fixture::Function(psi), SuiteId::Isoperimetric) => isoperimetric(&mut em, psi),
        (Fixture::Function(psi), SuiteId::Santalo) => santalo(&mut em, psi),
        (Fixture::Function(psi), SuiteId::RevLogsob) => rev_logsob(&mut em, psi),
        (Fixture::Function(psi), SuiteId::Logsob) => logsob(&mut em, psi),
        (Fixture::Body(k, shape), SuiteId::Bodies) => bodies(&mut em, k, shape),
        (Fixture::Body(k, _), SuiteId::TheoremNorm) => theorem_norm(&mut em, k),
        (Fixture::SProfile(fs), SuiteId::SconcaveDuality) => sconcave_duality(&mut em, fs),
        (Fixture::SProfile(fs), SuiteId::SLogsob) => s_logsob(&mut em, fs),
        (Fixture::SProfile(fs), SuiteId::LiftBody) => lift_body(&mut em, fs),
        (Fixture::Pair(a, b), SuiteId::Valuation) => valuation(&mut em, a, b),
        (f, s) => unreachable!("planner paired a {} fixture with suite {s}", f.class().as_str()),
    }
    em.out
}

fn seeded_points(n: usize, count: usize, radius: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..n).map(|_| rng.random_range(-radius..radius)).collect())
        .collect()
}

fn legendre(em: &mut Emitter, psi: &Oracle) {
    let spec = &em.task.spec;
    let dual = match dual_oracle(psi) {
        Ok(d) => d,
        Err(e) => return em.error("young", Params::default(), &e),
    };
    let n = psi.dim();
    let xs = seeded_points(n, YOUNG_PAIRS, 1.5, spec.seed);
    let ys = seeded_points(n, YOUNG_PAIRS, 1.0, spec.seed.wrapping_add(1));
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = xs.into_iter().zip(ys).collect();
    // Largest normalized excess of <x,y> over ψ(x) + ψ*(y); Young says <= 0.
    let mut excess = f64::NEG_INFINITY;
    for (x, y) in &pairs {
        let lhs = psi.eval(x) + dual.eval(y);
        let xy = dot(x, y);
        if lhs.is_finite() {
            excess = excess.max((xy - lhs) / (1.0 + xy.abs()));
        }
    }
    em.push("young", Params::default(), &Comparison::absolute(excess, 0.0, 0.0, 0.0, Relation::AtMost, YOUNG_TOL));
    let report = young_check(psi, &dual, &pairs, YOUNG_TOL);
    let c = Comparison::absolute(report.max_equality_gap, 0.0, 0.0, 0.0, Relation::AtMost, YOUNG_EQUALITY_TOL)
        .flag_if(report.equality_checked == 0);
    em.push("young-equality", Params::default(), &c);
}

fn mccann(em: &mut Emitter, psi: &Oracle) {
    let spec = em.task.spec.clone();
    let result = dual_oracle(psi).and_then(|dual| {
        let d = dual.clone();
        mccann_identity_check(psi, &dual, move |y| (-d.eval(y)).exp(), &spec)
    });
    match result {
        Ok(r) => {
            let c = Comparison::relative(
                r.pushforward.value,
                r.pushforward.error_estimate,
                r.direct.value,
                r.direct.error_estimate,
                Relation::Equal,
                spec.rel_tol,
            );
            em.push("", Params::default(), &c);
        }
        Err(e) => em.error("", Params::default(), &e),
    }
}

/// `I + E` with entries of `E` in `[-0.6, 0.6]` and `|det| > 0.2`.
fn random_map(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    loop {
        let a = DMatrix::<f64>::from_fn(n, n, |i, j| f64::from(u8::from(i == j)) + rng.random_range(-0.6..0.6));
        if a.determinant().abs() > 0.2 {
            return a;
        }
    }
}

fn asa_duality(em: &mut Emitter, psi: &Oracle) {
    let spec = em.task.spec.clone();
    let lambdas = em.task.lambdas.clone();
    let weights = WeightPair::exponential();
    for &l in &lambdas {
        match duality_residual(&weights, l, psi, &spec) {
            Ok(r) => em.push("", Params::lambda(l), &r.comparison),
            Err(e) => em.error("", Params::lambda(l), &e),
        }
    }
    if em.task.log_convexity && lambdas.len() >= 3 {
        match log_convexity_check(psi.as_ref(), &lambdas, &spec) {
            Ok(r) => {
                for ((l, v), e) in r.profile.lambdas.iter().zip(&r.profile.log_values).zip(&r.profile.log_errors) {
                    em.profile(*l, *v, *e);
                }
                if r.triples > 0 {
                    // Each triple's budget is at most twice the largest log error.
                    let budget = 2.0 * r.profile.log_errors.iter().cloned().fold(0.0, f64::max);
                    let c = Comparison::absolute(r.max_excess, budget, 0.0, 0.0, Relation::AtMost, LOG_CONVEXITY_TOL);
                    em.push("log-convexity", Params::default(), &c);
                }
            }
            Err(e) => em.error("log-convexity", Params::default(), &e),
        }
    }
    let n = psi.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for k in 0..em.task.maps {
        let a = random_map(n, &mut rng);
        let det = a.determinant().abs();
        let check = format!("map-{k}");
        let composed = match compose_linear(psi, &a) {
            Ok(c) => c,
            Err(e) => {
                em.error(&check, Params::default(), &e);
                continue;
            }
        };
        for l in HOMOGENEITY_LAMBDAS {
            let values = as_lambda(l, composed.as_ref(), &spec).and_then(|a| Ok((a, as_lambda(l, psi.as_ref(), &spec)?)));
            match values {
                Ok((lhs, rhs)) => {
                    let ratio = lhs.value / rhs.value;
                    let err = ratio.abs() * (lhs.relative_error() + rhs.relative_error());
                    let expected = det.powf(2.0 * l - 1.0);
                    let tol = spec.rel_tol.max(HOMOGENEITY_TOL);
                    let c = Comparison::relative(ratio, err, expected, 0.0, Relation::Equal, tol);
                    em.push(&check, Params::lambda(l), &c);
                }
                Err(e) => em.error(&check, Params::lambda(l), &e),
            }
        }
    }
}

fn isoperimetric(em: &mut Emitter, psi: &Oracle) {
    let spec = em.task.spec.clone();
    for l in em.task.lambdas.clone() {
        match isoperimetric_check(l, psi, &spec) {
            Ok(r) => em.push("", Params::lambda(l), &r.comparison),
            Err(e) => em.error("", Params::lambda(l), &e),
        }
    }
}

fn santalo(em: &mut Emitter, psi: &Oracle) {
    let spec = em.task.spec.clone();
    match santalo_product(psi, &em.task.lambdas.clone(), &spec) {
        Ok(r) => {
            em.push("", Params::default(), &r.comparison);
            for m in &r.remark {
                em.push("remark", Params::lambda(m.lambda), &m.comparison);
            }
        }
        Err(e) => em.error("", Params::default(), &e),
    }
}

fn rev_logsob(em: &mut Emitter, psi: &Oracle) {
    let spec = em.task.spec.clone();
    match LogConcaveMeasure::new(psi.clone(), &spec).and_then(|mu| reverse_logsob_check(&mu, &spec)) {
        Ok(r) => {
            em.push("", Params::default(), &r.comparison);
            em.push("boundary", Params::default(), &r.boundary);
        }
        Err(e) => em.error("", Params::default(), &e),
    }
}

fn logsob(em: &mut Emitter, psi: &Oracle) {
    let spec = em.task.spec.clone();
    match LogConcaveMeasure::new(psi.clone(), &spec).and_then(|mu| logsob_improved_check(&mu, &spec)) {
        Ok(r) => {
            em.push("improved", Params::default(), &r.improved);
            em.push("gross", Params::default(), &r.gross);
        }
        Err(e) => em.error("improved", Params::default(), &e),
    }
}

/// Closed-form `as_p`, when the shape has one.
fn closed_form_asp(k: &Body, shape: &Shape, p: f64, spec: &IntegrationSpec) -> convexa::Result<Option<f64>> {
    let n = k.dim();
    let nf = n as f64;
    Ok(match shape {
        // E = M^{-1/2} B and as_p(AB) = |det A|^{(n-p)/(n+p)} n|B|.
        Shape::Ellipsoid(m) => Some(m.determinant().powf(-0.5 * (nf - p) / (nf + p)) * nf * ball_volume(n)),
        Shape::Polytope if p > 0.0 => Some(0.0),
        Shape::Polytope if p == 0.0 => Some(nf * volume(k, spec)?.value),
        _ => None,
    })
}

fn bodies(em: &mut Emitter, k: &Body, shape: &Shape) {
    let spec = em.task.spec.clone();
    let tol = spec.rel_tol.max(BODY_TOL);
    for p in em.task.ps.clone() {
        let params = Params::p(p);
        match as_p_body(k, p, &spec).and_then(|a| Ok((a, closed_form_asp(k, shape, p, &spec)?))) {
            Ok((a, Some(expected))) => {
                let c = Comparison::relative(a.value.value, a.value.error_estimate, expected, 0.0, Relation::Equal, tol);
                em.push("closed-form", params, &c);
            }
            Ok((_, None)) => {}
            Err(e) => em.error("closed-form", params, &e),
        }
        if p != 0.0 {
            match asp_duality_check(k, p, &spec) {
                Ok(r) => em.push("duality", params, &r.comparison),
                Err(e) => em.error("duality", params, &e),
            }
        }
        match lp_isoperimetric_check(k, p, &spec) {
            Ok(r) => em.push("isoperimetric", params, &r.comparison),
            Err(e) => em.error("isoperimetric", params, &e),
        }
    }
}

fn theorem_norm(em: &mut Emitter, k: &Body) {
    let spec = em.task.spec.clone();
    for p in em.task.ps.clone() {
        match theorem_norm_check(k, p, &spec) {
            Ok(r) => {
                let params = Params {
                    lambda: Some(r.lambda),
                    p: Some(p),
                    s: None,
                };
                em.push("", params, &r.comparison);
            }
            Err(e) => em.error("", Params::p(p), &e),
        }
    }
}

fn sconcave_duality(em: &mut Emitter, fs: &SConcaveFunction) {
    let spec = em.task.spec.clone();
    let s = fs.s();
    let mut probed = false;
    for l in em.task.lambdas.clone() {
        let params = Params::lambda(l).with_s(s);
        match duality_s_check(l, fs, &spec) {
            Ok(r) => {
                em.push("", params, &r.comparison);
                if r.primal.value > 0.0 {
                    em.profile(l, r.primal.value.ln(), r.primal.relative_error());
                }
                if !probed && fs.is_smooth() {
                    probed = true;
                    for (check, value, tol) in [
                        ("hessian-identity", r.hessian_residual, HESSIAN_IDENTITY_TOL),
                        ("round-trip", r.round_trip, ROUND_TRIP_TOL),
                        ("implicit", r.implicit_residual, IMPLICIT_TOL),
                    ] {
                        let c = Comparison::absolute(value, 0.0, 0.0, 0.0, Relation::AtMost, tol);
                        em.push(check, Params::s(s), &c);
                    }
                }
            }
            Err(e) => em.error("", params, &e),
        }
    }
    let tol = spec.rel_tol.max(S_TOL);
    let dual = match fs.dual() {
        Ok(d) => d,
        Err(e) => return em.error("as1", Params::lambda(1.0).with_s(s), &e),
    };
    match as_lambda_s(0.0, fs, &spec).and_then(|a| Ok((a, fs.integral(&spec)?))) {
        Ok((a, t)) => {
            let c = Comparison::relative(a.value, a.error_estimate, t.value, t.error_estimate, Relation::Equal, tol);
            em.push("as0", Params::lambda(0.0).with_s(s), &c);
        }
        Err(e) => em.error("as0", Params::lambda(0.0).with_s(s), &e),
    }
    // The Stokes step behind as_1 = ∫f° needs f° to vanish on the boundary
    // of its support. The Holder bound past λ = 1 leans on the same identity.
    let regular = dual.edge_value(16) <= DUAL_EDGE_TOL;
    match as_lambda_s(1.0, fs, &spec).and_then(|a| Ok((a, dual.integral(&spec)?))) {
        Ok((a, t)) => {
            let c = Comparison::relative(a.value, a.error_estimate, t.value, t.error_estimate, Relation::Equal, tol)
                .flag_if(!regular);
            em.push("as1", Params::lambda(1.0).with_s(s), &c);
        }
        Err(e) => em.error("as1", Params::lambda(1.0).with_s(s), &e),
    }
    for l in [0.5, 1.5] {
        match holder_s_check(l, fs, &spec) {
            Ok(r) => {
                let c = r.comparison.flag_if(l > 1.0 && !regular);
                em.push("holder", Params::lambda(l).with_s(s), &c);
            }
            Err(e) => em.error("holder", Params::lambda(l).with_s(s), &e),
        }
    }
}

fn s_logsob(em: &mut Emitter, fs: &SConcaveFunction) {
    let spec = em.task.spec.clone();
    let s = fs.s();
    match fs.renormalized(&spec).and_then(|(g, _)| s_logsob_check(&g, &spec)) {
        Ok(r) => {
            em.push("", Params::s(s), &r.comparison);
            em.push("santalo", Params::s(s), &r.santalo);
        }
        Err(e) => em.error("", Params::s(s), &e),
    }
}

fn lift_body(em: &mut Emitter, fs: &SConcaveFunction) {
    let spec = em.task.spec.clone();
    let s = fs.s();
    for l in em.task.lambdas.clone() {
        match lift_check(fs, l, &spec) {
            Ok(r) => {
                let params = Params {
                    lambda: Some(l),
                    p: Some(r.p),
                    s: Some(s),
                };
                em.push("", params, &r.comparison);
            }
            Err(e) => em.error("", Params::lambda(l).with_s(s), &e),
        }
    }
}

fn valuation(em: &mut Emitter, a: &Oracle, b: &Oracle) {
    let spec = em.task.spec.clone();
    for l in em.task.lambdas.clone() {
        match valuation_check(a, b, l, &spec) {
            Ok(r) => em.push("", Params::lambda(l), &r.comparison),
            Err(e) => em.error("", Params::lambda(l), &e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_ids_round_trip() {
        for s in SuiteId::ALL {
            assert_eq!(SuiteId::parse(s.as_str()), Some(s));
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(json, format!("\"{}\"", s.as_str()));
        }
        assert_eq!(SuiteId::parse("duality"), None);
    }

    #[test]
    fn random_maps_are_invertible() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            assert!(random_map(3, &mut rng).determinant().abs() > 0.2);
        }
    }
}
