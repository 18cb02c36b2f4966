//! Uniform pass/fail records shared by the algebraic and geometric suites.

use serde::{Deserialize, Serialize};

/// One named check: how many instances ran, the worst residual seen and the
/// tolerance it was held to. Exact checks use residual = number of failing
/// instances and tolerance 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check_name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    pub fn numeric(name: impl Into<String>, samples: usize, max_residual: f64, tolerance: f64) -> Self {
        CheckResult {
            check_name: name.into(),
            samples,
            max_residual,
            tolerance,
            pass: max_residual.is_finite() && max_residual <= tolerance,
        }
    }

    pub fn exact(name: impl Into<String>, samples: usize, failures: usize) -> Self {
        CheckResult {
            check_name: name.into(),
            samples,
            max_residual: failures as f64,
            tolerance: 0.0,
            pass: failures == 0,
        }
    }
}

/// Results of a suite, in the order the checks ran.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn push(&mut self, c: CheckResult) {
        self.checks.push(c);
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.pass)
    }
}
