//! Run report: per-task status, residuals with their tolerances, and the
//! discrepancy ledger.

use std::collections::BTreeMap;

use ffo_core::Error;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ToleranceViolation,
    ValidationError,
    NumericalFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::ValidationError => 1,
            Status::NumericalFailure => 2,
            Status::ToleranceViolation => 3,
        }
    }

    /// Failures outrank violations; a numerical failure outranks a
    /// validation error.
    fn severity(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::ToleranceViolation => 1,
            Status::ValidationError => 2,
            Status::NumericalFailure => 3,
        }
    }

    pub fn worst(self, other: Status) -> Status {
        if other.severity() > self.severity() {
            other
        } else {
            self
        }
    }

    /// Precondition failures are validation errors; everything the
    /// integrator or a conditioning guard reports is numerical.
    pub fn of_error(e: &Error) -> Status {
        match e {
            Error::Profile(_)
            | Error::InvalidWindow(_)
            | Error::DriveVanishes { .. }
            | Error::DriveNotZero { .. }
            | Error::SingularChain(_)
            | Error::NotRankOne { .. } => Status::ValidationError,
            _ => Status::NumericalFailure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskReport {
    pub status: Status,
    pub max_residuals: BTreeMap<String, f64>,
    pub tolerance: BTreeMap<String, f64>,
    /// Recorded values that carry no pass/fail.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub observations: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Default for TaskReport {
    fn default() -> Self {
        TaskReport {
            status: Status::Ok,
            max_residuals: BTreeMap::new(),
            tolerance: BTreeMap::new(),
            observations: BTreeMap::new(),
            error: None,
        }
    }
}

impl TaskReport {
    /// Records a residual; anything above `tol` (or NaN) is a violation.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn check(&mut self, name: &str, value: f64, tol: f64) {
        self.max_residuals.insert(name.into(), value);
        self.tolerance.insert(name.into(), tol);
        if !(value <= tol) {
            self.status = self.status.worst(Status::ToleranceViolation);
        }
    }

    pub fn observe(&mut self, name: &str, value: f64) {
        self.observations.insert(name.into(), value);
    }

    pub fn failed(e: &Error) -> Self {
        TaskReport {
            status: Status::of_error(e),
            error: Some(e.to_string()),
            ..TaskReport::default()
        }
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.max_residuals.get(name).copied()
    }
}

/// One known mismatch between the stated and the implemented form of a
/// formula, with the numbers that show it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub id: &'static str,
    pub stated_form: &'static str,
    pub implemented_form: &'static str,
    /// `null` when the scenario cannot exercise the entry.
    pub evidence: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub status: Status,
    pub exit_code: i32,
    pub tasks: BTreeMap<String, TaskReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ledger: Vec<LedgerEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    /// Wall-clock time per task in milliseconds (not reproducible).
    pub timings_ms: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn task(&self, name: &str) -> Option<&TaskReport> {
        self.tasks.get(name)
    }

    pub fn ledger_entry(&self, id: &str) -> Option<&LedgerEntry> {
        self.ledger.iter().find(|e| e.id == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn violations_and_nan_are_flagged() {
        let mut r = TaskReport::default();
        r.check("a", 1e-12, 1e-9);
        assert_eq!(r.status, Status::Ok);
        r.check("b", f64::NAN, 1e-9);
        assert_eq!(r.status, Status::ToleranceViolation);
        assert_eq!(r.residual("a"), Some(1e-12));
    }

    #[test]
    fn severity_order() {
        let s = Status::Ok
            .worst(Status::ToleranceViolation)
            .worst(Status::ValidationError);
        assert_eq!(s.exit_code(), 1);
        assert_eq!(s.worst(Status::NumericalFailure).exit_code(), 2);
        assert_eq!(Status::NumericalFailure.worst(Status::Ok).exit_code(), 2);
    }

    #[test]
    fn error_classes() {
        let e = Error::DriveVanishes {
            t: 0.0,
            magnitude: 0.0,
        };
        assert_eq!(Status::of_error(&e), Status::ValidationError);
        let e = Error::StepSizeUnderflow { t: 1.0 };
        assert_eq!(Status::of_error(&e), Status::NumericalFailure);
    }
}
