//! Auction instances, outcomes and their JSON persistence.
//!
//! Rationals persist as `"p/q"` strings so files round-trip bit-exactly.

pub mod generate;

use std::collections::BTreeSet;
use std::path::Path;

use num::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rational::{format_rat, rat_string, rat_vec, Rat};
use crate::valuation::{AgentSet, Valuation, ValuationError, ValueOracle};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("instance must have at least one agent")]
    NoAgents,
    #[error("cost of agent {agent} is negative ({cost})")]
    NegativeCost { agent: usize, cost: String },
    #[error("budget must be positive (got {0})")]
    NonpositiveBudget(String),
    #[error("valuation covers {valuation} agents but instance has {n}")]
    DimensionMismatch { valuation: usize, n: usize },
    #[error("cost vector has {costs} entries but instance has {n} agents")]
    CostLengthMismatch { costs: usize, n: usize },
    #[error("invalid valuation: {0}")]
    Valuation(#[from] ValuationError),
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("winner index {0} out of range")]
    WinnerOutOfRange(usize),
    #[error("negative payment to agent {0}")]
    NegativePayment(usize),
    #[error("loser {0} has nonzero payment")]
    PaidLoser(usize),
    #[error("branch probabilities must be positive and sum to one")]
    BadProbabilities,
}

/// One procurement auction: agent costs, a budget, and the buyer's valuation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub n: usize,
    #[serde(with = "rat_string")]
    pub budget: Rat,
    #[serde(with = "rat_vec")]
    pub costs: Vec<Rat>,
    pub valuation: Valuation,
}

impl Instance {
    pub fn new(budget: Rat, costs: Vec<Rat>, valuation: Valuation) -> Result<Self, ModelError> {
        let inst = Instance {
            n: costs.len(),
            budget,
            costs,
            valuation,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n == 0 {
            return Err(ModelError::NoAgents);
        }
        if self.costs.len() != self.n {
            return Err(ModelError::CostLengthMismatch {
                costs: self.costs.len(),
                n: self.n,
            });
        }
        if let Some((i, c)) = self
            .costs
            .iter()
            .enumerate()
            .find(|(_, c)| **c < Rat::zero())
        {
            return Err(ModelError::NegativeCost {
                agent: i,
                cost: format_rat(c),
            });
        }
        if self.budget <= Rat::zero() {
            return Err(ModelError::NonpositiveBudget(format_rat(&self.budget)));
        }
        if let Some(arity) = self.valuation.arity() {
            if arity != self.n {
                return Err(ModelError::DimensionMismatch {
                    valuation: arity,
                    n: self.n,
                });
            }
        }
        self.valuation.validate(self.n)?;
        Ok(())
    }

    pub fn oracle(&self) -> ValueOracle<'_> {
        ValueOracle::new(&self.valuation, self.n)
    }

    /// Copy of the instance with agent `i` bidding `bid` instead.
    pub fn with_bid(&self, agent: usize, bid: Rat) -> Instance {
        let mut copy = self.clone();
        copy.costs[agent] = bid;
        copy
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, ModelError> {
        let inst: Instance = serde_json::from_str(s)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        Instance::from_json(&std::fs::read_to_string(path)?)
    }

    /// Hex digest of the canonical serialized form; keys suite reports.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("instance serializes");
        let hash = Sha256::digest(&bytes);
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Deterministic mechanism result: winner set plus a payment per agent.
/// Normalized (losers paid zero) with no positive transfers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub winners: BTreeSet<usize>,
    #[serde(with = "rat_vec")]
    pub payments: Vec<Rat>,
}

impl Outcome {
    pub fn empty(n: usize) -> Self {
        Outcome {
            winners: BTreeSet::new(),
            payments: vec![Rat::zero(); n],
        }
    }

    pub fn new(n: usize, pay: impl IntoIterator<Item = (usize, Rat)>) -> Self {
        let mut out = Outcome::empty(n);
        for (agent, p) in pay {
            out.winners.insert(agent);
            out.payments[agent] = p;
        }
        out
    }

    pub fn validate(&self, n: usize) -> Result<(), ModelError> {
        if let Some(&w) = self.winners.iter().find(|&&w| w >= n) {
            return Err(ModelError::WinnerOutOfRange(w));
        }
        for (i, p) in self.payments.iter().enumerate() {
            if *p < Rat::zero() {
                return Err(ModelError::NegativePayment(i));
            }
            if !self.winners.contains(&i) && !p.is_zero() {
                return Err(ModelError::PaidLoser(i));
            }
        }
        Ok(())
    }

    pub fn total_payment(&self) -> Rat {
        self.payments.iter().fold(Rat::zero(), |a, p| a + p)
    }

    /// Value of the allocated set under the instance's valuation.
    pub fn value(&self, inst: &Instance) -> Rat {
        let subset: AgentSet = self.winners.iter().copied().collect();
        inst.oracle().value(&subset).expect("winners in range")
    }
}

/// Explicit finite distribution over outcomes. The core never samples;
/// expectations are computed from the listed branches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomizedOutcome {
    pub branches: Vec<Branch>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    #[serde(with = "rat_string")]
    pub prob: Rat,
    pub outcome: Outcome,
}

impl RandomizedOutcome {
    pub fn fair_coin(a: Outcome, b: Outcome) -> Self {
        let half = Rat::new(1.into(), 2.into());
        RandomizedOutcome {
            branches: vec![
                Branch {
                    prob: half.clone(),
                    outcome: a,
                },
                Branch {
                    prob: half,
                    outcome: b,
                },
            ],
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), ModelError> {
        let mut total = Rat::zero();
        for b in &self.branches {
            if b.prob <= Rat::zero() {
                return Err(ModelError::BadProbabilities);
            }
            total += &b.prob;
            b.outcome.validate(n)?;
        }
        if !total.is_one() {
            return Err(ModelError::BadProbabilities);
        }
        Ok(())
    }

    /// Expected allocated value, exactly.
    pub fn expected_value(&self, inst: &Instance) -> Rat {
        self.branches
            .iter()
            .fold(Rat::zero(), |acc, b| acc + &b.prob * b.outcome.value(inst))
    }
}
