//! Verdicts for numerical identities and inequalities.

use serde::{Deserialize, Serialize};

/// Outcome of one check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Hypotheses not met; reported but never asserted.
    Flagged,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Flagged => "flagged",
        }
    }
}

/// Expected relation between the two sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
    Equal,
}

/// How margins and error budgets are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Absolute,
    /// Divided by `max(|lhs|, |rhs|)`.
    Relative,
}

/// Default multiple of the error budget a violation must exceed to fail.
pub const FAIL_FACTOR: f64 = 3.0;

/// `lhs` compared with `rhs` under a declared tolerance.
///
/// `margin` is the slack in the expected direction (negative on violation;
/// `-|lhs - rhs|` for equalities). The error budget is the combined error
/// estimate floored at `tol / 3`, and the check fails only when the violation
/// exceeds `factor` budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub scale: Scale,
    pub margin: f64,
    /// Combined error estimate of both sides, in the units of `margin`.
    pub error: f64,
    pub error_budget: f64,
    pub factor: f64,
    pub verdict: Verdict,
}

impl Comparison {
    pub fn new(lhs: f64, lhs_err: f64, rhs: f64, rhs_err: f64, relation: Relation, scale: Scale, tol: f64) -> Self {
        let mut c = Self {
            lhs,
            rhs,
            relation,
            scale,
            margin: 0.0,
            error: 0.0,
            error_budget: 0.0,
            factor: FAIL_FACTOR,
            verdict: Verdict::Pass,
        };
        let unit = match scale {
            Scale::Absolute => 1.0,
            Scale::Relative => {
                let m = lhs.abs().max(rhs.abs());
                if m > 0.0 {
                    m
                } else {
                    1.0
                }
            }
        };
        c.margin = match relation {
            Relation::AtMost => rhs - lhs,
            Relation::AtLeast => lhs - rhs,
            Relation::Equal => -(lhs - rhs).abs(),
        } / unit;
        c.error = (lhs_err.abs() + rhs_err.abs()) / unit;
        c.error_budget = c.error.max(tol / 3.0);
        c.verdict = c.judge();
        c
    }

    pub fn absolute(lhs: f64, lhs_err: f64, rhs: f64, rhs_err: f64, relation: Relation, tol: f64) -> Self {
        Self::new(lhs, lhs_err, rhs, rhs_err, relation, Scale::Absolute, tol)
    }

    pub fn relative(lhs: f64, lhs_err: f64, rhs: f64, rhs_err: f64, relation: Relation, tol: f64) -> Self {
        Self::new(lhs, lhs_err, rhs, rhs_err, relation, Scale::Relative, tol)
    }

    /// Replaces the fail factor and re-judges.
    pub fn with_factor(mut self, factor: f64) -> Self {
        self.factor = factor;
        if self.verdict != Verdict::Flagged {
            self.verdict = self.judge();
        }
        self
    }

    /// Marks the row as outside the hypotheses of the statement.
    pub fn flagged(mut self) -> Self {
        self.verdict = Verdict::Flagged;
        self
    }

    pub fn flag_if(self, cond: bool) -> Self {
        if cond {
            self.flagged()
        } else {
            self
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Slack beyond `factor` raw error estimates: a strict inequality that
    /// quadrature noise cannot explain.
    pub fn strictly_satisfied(&self) -> bool {
        self.relation != Relation::Equal && self.margin > self.factor * self.error
    }

    /// `max(0, -margin)`.
    pub fn violation(&self) -> f64 {
        (-self.margin).max(0.0)
    }

    fn judge(&self) -> Verdict {
        if !(self.margin.is_finite() && self.error_budget.is_finite()) {
            return Verdict::Fail;
        }
        if self.violation() > self.factor * self.error_budget {
            Verdict::Fail
        } else {
            Verdict::Pass
        }
    }
}

/// One row of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub suite: String,
    pub fixture: String,
    pub lambda: Option<f64>,
    pub p: Option<f64>,
    pub s: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub error_budget: f64,
    pub verdict: Verdict,
}

impl ReportRow {
    pub fn from_comparison(suite: &str, fixture: &str, c: &Comparison) -> Self {
        Self {
            suite: suite.to_string(),
            fixture: fixture.to_string(),
            lambda: None,
            p: None,
            s: None,
            lhs: c.lhs,
            rhs: c.rhs,
            margin: c.margin,
            error_budget: c.error_budget,
            verdict: c.verdict,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn with_s(mut self, s: f64) -> Self {
        self.s = Some(s);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn violation_needs_three_budgets() {
        let ok = Comparison::absolute(1.0 + 2.0e-3, 1e-3, 1.0, 0.0, Relation::AtMost, 0.0);
        assert_eq!(ok.verdict, Verdict::Pass);
        let bad = Comparison::absolute(1.0 + 4.0e-3, 1e-3, 1.0, 0.0, Relation::AtMost, 0.0);
        assert_eq!(bad.verdict, Verdict::Fail);
    }

    #[test]
    fn tolerance_floors_the_budget() {
        let c = Comparison::relative(1.0 + 0.9e-6, 0.0, 1.0, 0.0, Relation::Equal, 1e-6);
        assert_eq!(c.verdict, Verdict::Pass);
        let c = Comparison::relative(1.0 + 1.1e-6, 0.0, 1.0, 0.0, Relation::Equal, 1e-6);
        assert_eq!(c.verdict, Verdict::Fail);
    }

    #[test]
    fn nan_fails_and_flagged_sticks() {
        let c = Comparison::absolute(f64::NAN, 0.0, 1.0, 0.0, Relation::AtLeast, 1e-3);
        assert_eq!(c.verdict, Verdict::Fail);
        let c = c.flagged().with_factor(4.0);
        assert_eq!(c.verdict, Verdict::Flagged);
    }

    #[test]
    fn strictness_uses_raw_error() {
        let c = Comparison::absolute(0.5, 0.01, 1.0, 0.01, Relation::AtMost, 1.0);
        assert!(c.passed());
        assert!(c.strictly_satisfied());
        let c = Comparison::absolute(0.99, 0.01, 1.0, 0.01, Relation::AtMost, 0.0);
        assert!(!c.strictly_satisfied());
    }
}
