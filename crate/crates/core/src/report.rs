//! Outcome records shared by the verification suites.

use serde::Serialize;

/// One verified item: which check, on what, whether it passed, and the data that decided it.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CheckReport {
    pub check: String,
    pub subject: String,
    pub passed: bool,
    pub witness: serde_json::Value,
}

impl CheckReport {
    pub fn new(check: &str, subject: impl Into<String>, passed: bool, witness: serde_json::Value) -> Self {
        CheckReport { check: check.to_string(), subject: subject.into(), passed, witness }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }
}
