//! Verification report emitted by `check`.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    /// `null` in JSON when the check could not be evaluated.
    pub measured: f64,
    /// The check passes when `measured < tolerance`.
    pub tolerance: f64,
    /// The claim being checked.
    pub citation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl CheckResult {
    pub fn evaluate(name: &str, citation: &str, tolerance: f64, measured: nonholo::Result<f64>) -> Self {
        let (measured, diagnostic) = match measured {
            Ok(v) => (v, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        let pass = measured.is_finite() && measured < tolerance;
        Self {
            name: name.to_string(),
            status: if pass { Status::Pass } else { Status::Fail },
            measured,
            tolerance,
            citation: citation.to_string(),
            diagnostic,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub system: String,
    pub seed: u64,
    pub samples: usize,
    pub passed: bool,
    /// Sorted by name.
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn new(system: &str, seed: u64, samples: usize, mut checks: Vec<CheckResult>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        Self {
            system: system.to_string(),
            seed,
            samples,
            passed: checks.iter().all(CheckResult::passed),
            checks,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serialisable")
    }
}
