//! Check outcomes and suite summaries.

use serde::Serialize;

use crate::stats::{KsResult, McEstimate};

/// Outcome of one formula-versus-oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub analytic: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub z: Option<f64>,
    pub p_value: Option<f64>,
    /// Human-readable pass rule, e.g. `|z| <= 3`.
    pub criterion: String,
    pub tolerance: f64,
    pub pass: bool,
    /// Diagnostics are reported but never fail a suite.
    pub gated: bool,
    pub seed: u64,
    pub n: usize,
    pub censoring: Option<f64>,
    pub notes: Vec<String>,
}

impl CheckReport {
    fn base(check: impl Into<String>, seed: u64) -> Self {
        Self {
            check: check.into(),
            analytic: f64::NAN,
            estimate: f64::NAN,
            std_error: 0.0,
            z: None,
            p_value: None,
            criterion: String::new(),
            tolerance: 0.0,
            pass: false,
            gated: true,
            seed,
            n: 0,
            censoring: None,
            notes: Vec::new(),
        }
    }

    /// Passes when |estimate − analytic| ≤ k standard errors.
    pub fn z_test(
        check: impl Into<String>,
        analytic: f64,
        est: McEstimate,
        k: f64,
        seed: u64,
    ) -> Self {
        let z = est.z_score(analytic);
        Self {
            analytic,
            estimate: est.mean,
            std_error: est.std_error,
            z: Some(z),
            criterion: format!("|z| <= {k}"),
            tolerance: k,
            pass: z.abs() <= k,
            n: est.n,
            ..Self::base(check, seed)
        }
    }

    /// One-sided test of estimate ≥ bound. With `strict` the estimate must
    /// exceed the bound by k standard errors; otherwise it may fall short by
    /// at most k.
    pub fn at_least(
        check: impl Into<String>,
        bound: f64,
        est: McEstimate,
        k: f64,
        strict: bool,
        seed: u64,
    ) -> Self {
        let z = est.z_score(bound);
        let pass = if strict { z >= k } else { z >= -k };
        Self {
            analytic: bound,
            estimate: est.mean,
            std_error: est.std_error,
            z: Some(z),
            criterion: if strict {
                format!("z >= {k}")
            } else {
                format!("z >= -{k}")
            },
            tolerance: k,
            pass,
            n: est.n,
            ..Self::base(check, seed)
        }
    }

    /// Kolmogorov–Smirnov test, passing when p > alpha.
    pub fn ks(check: impl Into<String>, ks: KsResult, alpha: f64, seed: u64) -> Self {
        Self {
            analytic: 0.0,
            estimate: ks.statistic,
            p_value: Some(ks.p_value),
            criterion: format!("p > {alpha}"),
            tolerance: alpha,
            pass: ks.p_value > alpha,
            n: ks.n,
            ..Self::base(check, seed)
        }
    }

    /// Deterministic comparison within an absolute tolerance.
    pub fn abs_tol(check: impl Into<String>, analytic: f64, value: f64, tol: f64) -> Self {
        Self {
            analytic,
            estimate: value,
            criterion: format!("|error| <= {tol:e}"),
            tolerance: tol,
            pass: (value - analytic).abs() <= tol,
            ..Self::base(check, 0)
        }
    }

    /// Deterministic comparison within a relative tolerance.
    pub fn rel_tol(check: impl Into<String>, analytic: f64, value: f64, tol: f64) -> Self {
        Self {
            analytic,
            estimate: value,
            criterion: format!("|relative error| <= {tol:e}"),
            tolerance: tol,
            pass: (value - analytic).abs() <= tol * analytic.abs(),
            ..Self::base(check, 0)
        }
    }

    /// Passes when `value ≤ bound`, e.g. a maximum residual.
    pub fn at_most(check: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            analytic: 0.0,
            estimate: value,
            criterion: format!("value <= {bound:e}"),
            tolerance: bound,
            pass: value <= bound,
            ..Self::base(check, 0)
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn with_censoring(mut self, rate: f64, limit: f64) -> Self {
        self.censoring = Some(rate);
        if rate >= limit {
            self.pass = false;
            self.notes
                .push(format!("censoring {rate:.2e} >= {limit:e}"));
        }
        self
    }

    pub fn with_seed(mut self, seed: u64, n: usize) -> Self {
        self.seed = seed;
        self.n = n;
        self
    }

    pub fn diagnostic(mut self) -> Self {
        self.gated = false;
        self
    }

    /// Fails the report unless `cond` holds, recording why.
    pub fn require(mut self, cond: bool, why: impl Into<String>) -> Self {
        if !cond {
            self.pass = false;
            self.notes.push(why.into());
        }
        self
    }

    pub fn failed(&self) -> bool {
        self.gated && !self.pass
    }

    /// One line for terminal output.
    pub fn summary_line(&self) -> String {
        let verdict = match (self.gated, self.pass) {
            (false, _) => "INFO",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        };
        let mut s = format!(
            "{verdict} {} analytic={:.6} estimate={:.6}",
            self.check, self.analytic, self.estimate
        );
        if self.std_error > 0.0 {
            s.push_str(&format!(" se={:.2e}", self.std_error));
        }
        if let Some(z) = self.z {
            s.push_str(&format!(" z={z:.2}"));
        }
        if let Some(p) = self.p_value {
            s.push_str(&format!(" p={p:.3}"));
        }
        if let Some(c) = self.censoring {
            s.push_str(&format!(" censored={c:.1e}"));
        }
        s.push_str(&format!(" [{}]", self.criterion));
        s
    }
}

/// Reports of a run with pass/fail counts. Wall time is kept out of the JSON
/// so that summaries are byte-reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub experiment: String,
    pub seed: u64,
    pub reports: Vec<CheckReport>,
    pub passed: usize,
    pub failed: usize,
    #[serde(skip)]
    pub wall_time_secs: f64,
}

impl SuiteSummary {
    pub fn new(
        experiment: impl Into<String>,
        seed: u64,
        reports: Vec<CheckReport>,
        wall_time_secs: f64,
    ) -> Self {
        let failed = reports.iter().filter(|r| r.failed()).count();
        Self {
            experiment: experiment.into(),
            seed,
            passed: reports.len() - failed,
            failed,
            reports,
            wall_time_secs,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "check,analytic,estimate,std_error,z,p_value,criterion,pass,gated,seed,n,censoring\n",
        );
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.reports {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                csv_field(&r.check),
                r.analytic,
                r.estimate,
                r.std_error,
                opt(r.z),
                opt(r.p_value),
                csv_field(&r.criterion),
                r.pass,
                r.gated,
                r.seed,
                r.n,
                opt(r.censoring)
            ));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(mean: f64, se: f64) -> McEstimate {
        McEstimate {
            mean,
            std_error: se,
            n: 100,
        }
    }

    #[test]
    fn z_test_rule() {
        assert!(CheckReport::z_test("a", 1.0, est(1.02, 0.01), 3.0, 1).pass);
        assert!(!CheckReport::z_test("a", 1.0, est(1.04, 0.01), 3.0, 1).pass);
    }

    #[test]
    fn one_sided_rules() {
        assert!(CheckReport::at_least("a", 0.0, est(0.06, 0.01), 5.0, true, 1).pass);
        assert!(!CheckReport::at_least("a", 0.0, est(0.04, 0.01), 5.0, true, 1).pass);
        assert!(CheckReport::at_least("a", 0.0, est(-0.02, 0.01), 3.0, false, 1).pass);
    }

    #[test]
    fn diagnostics_do_not_fail_suites() {
        let bad = CheckReport::abs_tol("x", 1.0, 2.0, 0.1);
        let info = bad.clone().diagnostic();
        let s = SuiteSummary::new("e", 1, vec![bad, info], 0.0);
        assert_eq!((s.passed, s.failed), (1, 1));
        assert!(!s.to_json().unwrap().contains("wall_time"));
    }

    #[test]
    fn censoring_limit_fails() {
        let r = CheckReport::abs_tol("x", 1.0, 1.0, 0.1).with_censoring(0.01, 1e-3);
        assert!(!r.pass);
    }

    #[test]
    fn csv_quotes_commas() {
        let s = SuiteSummary::new(
            "e",
            1,
            vec![CheckReport::abs_tol("a,b", 1.0, 1.0, 0.1)],
            0.0,
        );
        assert!(s.to_csv().contains("\"a,b\""));
    }
}
