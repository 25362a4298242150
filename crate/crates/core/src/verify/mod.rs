//! Independent oracles and auditors: brute-force optimum, outcome audits,
//! truthfulness audits (monotonicity plus threshold bisection), the
//! approximation-ratio measurement, and the anonymity/stability
//! characterization check.

mod brute;
mod characterize;
mod truthful;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use brute::{brute_force_opt, BRUTE_FORCE_MAX_N};
pub use characterize::audit_characterization;
pub use truthful::{
    audit_outcome, audit_truthfulness, best_deviation_gain, bisect_threshold,
    bisect_threshold_with, deviation_bid_grid, ThresholdBracket, BISECTION_BITS,
};

use crate::mechanisms::MechanismError;
use crate::rational::{format_rat, rat_string, Rat};
use crate::valuation::ValuationError;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("instance has {n} agents; exhaustive search refuses beyond {max}")]
    TooLarge { n: usize, max: usize },
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
}

/// Exact approximation ratio OPT / allocated, with an explicit sentinel for
/// a worthless allocation against a positive optimum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ApxRatio {
    Finite(Rat),
    Unbounded,
}

impl ApxRatio {
    pub fn at_most(&self, bound: &Rat) -> bool {
        match self {
            ApxRatio::Finite(r) => r <= bound,
            ApxRatio::Unbounded => false,
        }
    }
}

impl fmt::Display for ApxRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApxRatio::Finite(r) => f.write_str(&format_rat(r)),
            ApxRatio::Unbounded => f.write_str("inf"),
        }
    }
}

/// OPT / allocated value. `value` must be the allocated (or expected) value
/// of the audited outcome on this instance.
pub fn approximation_ratio(
    inst: &crate::model::Instance,
    value: &Rat,
) -> Result<ApxRatio, VerifyError> {
    use num::Zero;
    let (_, opt) = brute_force_opt(inst)?;
    if value.is_zero() {
        if opt.is_zero() {
            Ok(ApxRatio::Finite(num::One::one()))
        } else {
            Ok(ApxRatio::Unbounded)
        }
    } else {
        Ok(ApxRatio::Finite(opt / value))
    }
}

/// One verified property with pass/fail and human-readable evidence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditCheck {
    pub name: String,
    pub passed: bool,
    pub evidence: String,
}

/// A bid pair witnessing a truthfulness violation: the agent loses at the
/// lower bid yet wins at the higher one, or her payment misses the bracket.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Counterexample {
    pub agent: usize,
    #[serde(with = "rat_string")]
    pub bid_low: Rat,
    #[serde(with = "rat_string")]
    pub bid_high: Rat,
    pub violation: String,
}

/// Structured evidence for each audited property of one mechanism run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditReport {
    pub subject: String,
    pub instance_digest: String,
    pub checks: Vec<AuditCheck>,
    pub counterexample: Option<Counterexample>,
}

impl AuditReport {
    pub fn new(subject: impl Into<String>, digest: String) -> Self {
        AuditReport {
            subject: subject.into(),
            instance_digest: digest,
            checks: Vec::new(),
            counterexample: None,
        }
    }

    /// Failing checks must carry evidence; enforced here.
    pub fn push(&mut self, name: impl Into<String>, passed: bool, evidence: impl Into<String>) {
        let evidence = evidence.into();
        assert!(
            passed || !evidence.is_empty() || self.counterexample.is_some(),
            "failing check requires evidence"
        );
        self.checks.push(AuditCheck {
            name: name.into(),
            passed,
            evidence,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &AuditCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn passed_count(&self) -> usize {
        self.checks.iter().filter(|c| c.passed).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
