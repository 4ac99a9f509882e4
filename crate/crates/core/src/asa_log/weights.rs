use serde::{Deserialize, Serialize};

/// Positive weight `F: R -> (0, inf)` used in the general affine surface area.
///
/// Everything is evaluated in log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    /// `e^{-t}`.
    Exp,
    /// `c·e^{-t}`, stored as `ln c`.
    ScaledExp { ln_c: f64 },
    /// `Σ w_k e^{-r_k t}` with `w_k > 0`; rates may be negative.
    Mixture { terms: Vec<(f64, f64)> },
    /// `(1 - s t)₊^{1/s}`, zero for `t >= 1/s`.
    SPower { s: f64 },
}

impl Weight {
    /// `cosh(r t) = (e^{-rt} + e^{rt})/2`.
    pub fn even_mixture(rate: f64) -> Self {
        Weight::Mixture {
            terms: vec![(0.5, rate), (0.5, -rate)],
        }
    }

    pub fn ln(&self, t: f64) -> f64 {
        match self {
            Weight::Exp => -t,
            Weight::ScaledExp { ln_c } => ln_c - t,
            Weight::Mixture { terms } => {
                let m = terms.iter().map(|(_, r)| -r * t).fold(f64::NEG_INFINITY, f64::max);
                if !m.is_finite() {
                    return m;
                }
                m + terms.iter().map(|(w, r)| w * (-r * t - m).exp()).sum::<f64>().ln()
            }
            Weight::SPower { s } => {
                let u = 1.0 - s * t;
                if u > 0.0 {
                    u.ln() / s
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.ln(t).exp()
    }

    pub fn is_non_increasing(&self) -> bool {
        match self {
            Weight::Exp | Weight::ScaledExp { .. } | Weight::SPower { .. } => true,
            Weight::Mixture { terms } => terms.iter().all(|(_, r)| *r >= 0.0),
        }
    }

    pub fn is_log_concave(&self) -> bool {
        match self {
            Weight::Exp | Weight::ScaledExp { .. } | Weight::SPower { .. } => true,
            Weight::Mixture { terms } => {
                let first = terms.first().map(|t| t.1);
                terms.iter().all(|(_, r)| Some(*r) == first)
            }
        }
    }

    fn exp_scale(&self) -> Option<f64> {
        match self {
            Weight::Exp => Some(0.0),
            Weight::ScaledExp { ln_c } => Some(*ln_c),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Weight::Exp => "exp".into(),
            Weight::ScaledExp { ln_c } => format!("exp*{:.4}", ln_c.exp()),
            Weight::Mixture { terms } => format!("mix{}", terms.len()),
            Weight::SPower { s } => format!("spow{s}"),
        }
    }
}

/// The pair `(F1, F2)` and its envelope
/// `F(t) = sup_{(t1+t2)/2 >= t} sqrt(F1(t1) F2(t2))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightPair {
    pub f1: Weight,
    pub f2: Weight,
}

/// Half-width of the scan used by the numerical envelope.
const ENVELOPE_SPAN: f64 = 64.0;
const ENVELOPE_SCAN: usize = 1025;

impl WeightPair {
    pub fn new(f1: Weight, f2: Weight) -> Self {
        Self { f1, f2 }
    }

    pub fn exponential() -> Self {
        Self::new(Weight::Exp, Weight::Exp)
    }

    /// Both weights are multiples of `e^{-t}`.
    pub fn is_exponential(&self) -> bool {
        self.f1.exp_scale().is_some() && self.f2.exp_scale().is_some()
    }

    /// The pair with `F1` and `F2` exchanged, as used on the dual side.
    pub fn swapped(&self) -> Self {
        Self::new(self.f2.clone(), self.f1.clone())
    }

    pub fn ln_envelope(&self, t: f64) -> f64 {
        if let (Some(a), Some(b)) = (self.f1.exp_scale(), self.f2.exp_scale()) {
            // sqrt(c1 e^{-t1} c2 e^{-t2}) only depends on t1 + t2.
            return 0.5 * (a + b) - t;
        }
        if self.f1.is_non_increasing() && self.f2.is_non_increasing() {
            return self.ln_inner(t);
        }
        // Without monotonicity the constraint (t1+t2)/2 >= t is not active.
        let step = ENVELOPE_SPAN / (ENVELOPE_SCAN - 1) as f64;
        (0..ENVELOPE_SCAN)
            .map(|k| self.ln_inner(t + k as f64 * step))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn envelope(&self, t: f64) -> f64 {
        self.ln_envelope(t).exp()
    }

    /// `sup_u (ln F1(s+u) + ln F2(s-u))/2`: coarse scan, then golden section
    /// on the bracketing cells.
    fn ln_inner(&self, s: f64) -> f64 {
        let h = |u: f64| 0.5 * (self.f1.ln(s + u) + self.f2.ln(s - u));
        let step = 2.0 * ENVELOPE_SPAN / (ENVELOPE_SCAN - 1) as f64;
        let mut best = (f64::NEG_INFINITY, 0.0);
        for k in 0..ENVELOPE_SCAN {
            let u = -ENVELOPE_SPAN + k as f64 * step;
            let v = h(u);
            if v > best.0 {
                best = (v, u);
            }
        }
        if !best.0.is_finite() {
            return best.0;
        }
        let (mut a, mut b) = (best.1 - step, best.1 + step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (h(c), h(d));
        for _ in 0..80 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = h(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = h(d);
            }
        }
        best.0.max(fc).max(fd)
    }
}
