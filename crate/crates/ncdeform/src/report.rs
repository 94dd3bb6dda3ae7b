//! Machine-readable check reports.

use serde::{Deserialize, Serialize};

use crate::weyl::WeylElement;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckStatus {
    #[serde(rename = "exact-pass")]
    ExactPass,
    #[serde(rename = "fail")]
    Fail,
}

/// One verified identity: exact zero of a canonical form, or a failure with
/// a witness monomial.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub indices: Vec<usize>,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<IdentityCheck>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record that `diff` vanishes on every retained coefficient through
    /// derivative order `through`.
    pub fn record_zero(
        &mut self,
        identity: &str,
        indices: &[usize],
        diff: &WeylElement,
        through: u32,
    ) {
        let witness = diff.witness_through(through);
        self.checks.push(IdentityCheck {
            identity: identity.to_string(),
            indices: indices.to_vec(),
            status: if witness.is_none() {
                CheckStatus::ExactPass
            } else {
                CheckStatus::Fail
            },
            witness,
        });
    }

    pub fn record_bool(
        &mut self,
        identity: &str,
        indices: &[usize],
        ok: bool,
        witness: Option<String>,
    ) {
        self.checks.push(IdentityCheck {
            identity: identity.to_string(),
            indices: indices.to_vec(),
            status: if ok {
                CheckStatus::ExactPass
            } else {
                CheckStatus::Fail
            },
            witness: if ok { None } else { witness },
        });
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    pub fn all_passed(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c.status == CheckStatus::ExactPass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn len(&self) -> usize {
        self.checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }
}

/// One numeric sweep: max absolute error over a sample set against a fixed
/// tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FloatCheck {
    pub check: String,
    pub samples: usize,
    pub max_abs_err: f64,
    pub tol: f64,
    pub status: String,
}

impl FloatCheck {
    pub fn from_errors(check: &str, errors: &[f64], tol: f64) -> Self {
        let max_abs_err = errors.iter().cloned().fold(0.0f64, f64::max);
        Self {
            check: check.to_string(),
            samples: errors.len(),
            max_abs_err,
            tol,
            status: if max_abs_err <= tol && max_abs_err.is_finite() {
                "pass".to_string()
            } else {
                "fail".to_string()
            },
        }
    }

    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FloatReport {
    pub checks: Vec<FloatCheck>,
}

impl FloatReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: FloatCheck) {
        self.checks.push(check);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(FloatCheck::passed)
    }
}
