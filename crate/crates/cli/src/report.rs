//! `report.json`: every compared number with its reference, tolerance and
//! verdict. Nothing time-dependent goes here, so reruns are byte-identical;
//! wall time lives in `metadata.json`.

use std::collections::BTreeMap;

use dysonlab::correlators::ObservableReport;
use dysonlab::loggas::ComplexEstimate;
use serde::Serialize;

use crate::config::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceKind {
    /// `|value - reference| <= tolerance`
    Absolute,
    /// `|value - reference| <= tolerance |reference|`
    Relative,
    /// `|value - reference| <= tolerance * error`
    Sigma,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
    pub tolerance: f64,
    pub tolerance_kind: ToleranceKind,
    pub pass: bool,
}

impl Check {
    pub fn absolute(name: impl Into<String>, value: f64, reference: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            reference,
            error: None,
            oracle: None,
            tolerance,
            tolerance_kind: ToleranceKind::Absolute,
            pass: (value - reference).abs() <= tolerance,
        }
    }

    pub fn relative(name: impl Into<String>, value: f64, reference: f64, tolerance: f64) -> Self {
        Self {
            tolerance_kind: ToleranceKind::Relative,
            pass: (value - reference).abs() <= tolerance * reference.abs(),
            ..Self::absolute(name, value, reference, tolerance)
        }
    }

    /// `|estimate - target|` against its combined error.
    pub fn complex_sigma(name: impl Into<String>, est: &ComplexEstimate, target: f64, k: f64) -> Self {
        Self {
            name: name.into(),
            value: (est.value - target).norm(),
            reference: 0.0,
            error: Some(est.sigma()),
            oracle: None,
            tolerance: k,
            tolerance_kind: ToleranceKind::Sigma,
            pass: est.consistent_with(target.into(), k),
        }
    }
}

impl From<&ObservableReport> for Check {
    fn from(r: &ObservableReport) -> Self {
        Self {
            name: r.name.clone(),
            value: r.estimate,
            reference: r.closed_form,
            error: Some(r.error),
            oracle: r.oracle,
            tolerance: r.k,
            tolerance_kind: ToleranceKind::Sigma,
            pass: r.pass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ChecksFailed,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub library_version: &'static str,
    pub mode: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Sampler seed; replica `k` uses stream `k` of it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    pub checks: Vec<Check>,
    /// Descriptive results without a reference value.
    pub quantities: BTreeMap<String, f64>,
    pub files: Vec<String>,
}

impl Report {
    pub fn new(mode: Mode) -> Self {
        Self {
            tool: "dysonlab",
            version: env!("CARGO_PKG_VERSION"),
            library_version: dysonlab::VERSION,
            mode: mode.name(),
            status: Status::Ok,
            error: None,
            seed: None,
            replicas: None,
            checks: Vec::new(),
            quantities: BTreeMap::new(),
            files: Vec::new(),
        }
    }

    pub fn check(&mut self, check: Check) {
        log::info!(
            "{} {}: {:e} vs {:e}",
            if check.pass { "pass" } else { "FAIL" },
            check.name,
            check.value,
            check.reference
        );
        self.checks.push(check);
    }

    pub fn quantity(&mut self, name: impl Into<String>, value: f64) {
        self.quantities.insert(name.into(), value);
    }

    pub fn fail(&mut self, message: String) {
        self.status = Status::Error;
        self.error = Some(message);
    }

    /// Settles the status from the checks unless an error was recorded.
    pub fn finish(&mut self) {
        if self.status != Status::Error {
            self.status = if self.checks.iter().all(|c| c.pass) {
                Status::Ok
            } else {
                Status::ChecksFailed
            };
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.status {
            Status::Ok => 0,
            Status::ChecksFailed => 1,
            Status::Error => 2,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
