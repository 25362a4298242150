//! Budget-feasible procurement mechanisms.
//!
//! Every mechanism is a pure function of an instance. Agents whose bids
//! exceed the budget are never considered: no budget-feasible payment could
//! cover such a bid, and dropping them keeps allocation rules monotone over
//! the whole bid space.

pub mod greedy;
mod knapsack;
mod matching;
mod naive_max;
pub mod payments;
mod shapley;
mod submodular;
mod symmetric;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use greedy::{feasible_prefix_len, greedy_order, proportional_share_rule, GreedyTrace};
pub use knapsack::knapsack;
pub use matching::matching;
pub use naive_max::naive_max;
pub use payments::{threshold_payments, ThresholdDetail};
pub use shapley::shapley_coverage;
pub use submodular::{bprime, submodular, submodular_greedy_branch, submodular_max_branch};
pub use symmetric::{symmetric, symmetric_flat_pay};

use crate::model::{Instance, Outcome, RandomizedOutcome};
use crate::valuation::ValuationError;

#[derive(Debug, Error)]
pub enum MechanismError {
    #[error("{mechanism} requires a {expected} valuation, got {got}")]
    WrongFamily {
        mechanism: &'static str,
        expected: &'static str,
        got: &'static str,
    },
    #[error("greedy ordering requires a nonempty subset")]
    EmptySubset,
    #[error("threshold payments require a nonempty winner set")]
    NoWinners,
    #[error(transparent)]
    Valuation(#[from] ValuationError),
}

/// Result of running a mechanism: deterministic or an explicit distribution.
#[derive(Debug, Clone)]
pub enum MechOutcome {
    Det(Outcome),
    Rand(RandomizedOutcome),
}

impl MechOutcome {
    pub fn expected_value(&self, inst: &Instance) -> crate::rational::Rat {
        match self {
            MechOutcome::Det(o) => o.value(inst),
            MechOutcome::Rand(r) => r.expected_value(inst),
        }
    }
}

/// Registry of runnable mechanisms. The two `Submodular*Branch` entries are
/// the deterministic branches of the randomized mechanism, exposed so each
/// can be audited on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MechanismId {
    Symmetric,
    /// Variant of `Symmetric` that pays the fair share B/k only, without
    /// capping by the first excluded cost. Shipped as a known-broken
    /// regression target.
    SymmetricBk,
    Knapsack,
    Matching,
    Submodular,
    SubmodularGreedyBranch,
    SubmodularMaxBranch,
    NaiveMax,
    ShapleyCoverage,
}

impl MechanismId {
    pub const ALL: [MechanismId; 9] = [
        MechanismId::Symmetric,
        MechanismId::SymmetricBk,
        MechanismId::Knapsack,
        MechanismId::Matching,
        MechanismId::Submodular,
        MechanismId::SubmodularGreedyBranch,
        MechanismId::SubmodularMaxBranch,
        MechanismId::NaiveMax,
        MechanismId::ShapleyCoverage,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MechanismId::Symmetric => "symmetric",
            MechanismId::SymmetricBk => "symmetric_bk",
            MechanismId::Knapsack => "knapsack",
            MechanismId::Matching => "matching",
            MechanismId::Submodular => "submodular",
            MechanismId::SubmodularGreedyBranch => "submodular_greedy",
            MechanismId::SubmodularMaxBranch => "submodular_max",
            MechanismId::NaiveMax => "naive_max",
            MechanismId::ShapleyCoverage => "shapley",
        }
    }

    pub fn is_randomized(&self) -> bool {
        matches!(self, MechanismId::Submodular)
    }

    /// Deterministic mechanisms making up a randomized one, in branch order.
    pub fn branches(&self) -> Option<[MechanismId; 2]> {
        match self {
            MechanismId::Submodular => Some([
                MechanismId::SubmodularGreedyBranch,
                MechanismId::SubmodularMaxBranch,
            ]),
            _ => None,
        }
    }

    pub fn run(&self, inst: &Instance) -> Result<MechOutcome, MechanismError> {
        Ok(match self {
            MechanismId::Symmetric => MechOutcome::Det(symmetric(inst)?),
            MechanismId::SymmetricBk => MechOutcome::Det(symmetric_flat_pay(inst)?),
            MechanismId::Knapsack => MechOutcome::Det(knapsack(inst)?),
            MechanismId::Matching => MechOutcome::Det(matching(inst)?),
            MechanismId::Submodular => MechOutcome::Rand(submodular(inst)?),
            MechanismId::SubmodularGreedyBranch => {
                MechOutcome::Det(submodular_greedy_branch(inst)?)
            }
            MechanismId::SubmodularMaxBranch => MechOutcome::Det(submodular_max_branch(inst)?),
            MechanismId::NaiveMax => MechOutcome::Det(naive_max(inst)?),
            MechanismId::ShapleyCoverage => MechOutcome::Det(shapley_coverage(inst)?),
        })
    }

    /// Runs a deterministic mechanism; errors if randomized.
    pub fn run_det(&self, inst: &Instance) -> Result<Outcome, MechanismError> {
        match self.run(inst)? {
            MechOutcome::Det(o) => Ok(o),
            MechOutcome::Rand(_) => panic!("run_det called on randomized mechanism"),
        }
    }

    /// Winner set of a deterministic mechanism without computing payments.
    /// Auditors probe thousands of rebids per instance; skipping payment
    /// work here is what keeps bisection cheap.
    pub fn allocation(
        &self,
        inst: &Instance,
    ) -> Result<std::collections::BTreeSet<usize>, MechanismError> {
        match self {
            MechanismId::Symmetric | MechanismId::SymmetricBk => {
                symmetric::symmetric_allocation(inst)
            }
            MechanismId::Knapsack => knapsack::knapsack_allocation(inst),
            MechanismId::Matching => matching::matching_allocation(inst),
            MechanismId::SubmodularGreedyBranch => {
                submodular::submodular_greedy_allocation(inst)
            }
            MechanismId::SubmodularMaxBranch => submodular::submodular_max_allocation(inst),
            MechanismId::NaiveMax => naive_max::naive_max_allocation(inst),
            MechanismId::ShapleyCoverage => Ok(self.run_det(inst)?.winners),
            MechanismId::Submodular => {
                panic!("randomized mechanism has no single allocation; use its branches")
            }
        }
    }
}

impl fmt::Display for MechanismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MechanismId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MechanismId::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown mechanism {:?}; valid mechanisms: {}",
                    s,
                    MechanismId::ALL.map(|m| m.name()).join(", ")
                )
            })
    }
}

/// Agents whose bid is within the budget, in index order.
pub(crate) fn considered_agents(inst: &Instance) -> Vec<usize> {
    (0..inst.n)
        .filter(|&i| inst.costs[i] <= inst.budget)
        .collect()
}

/// Largest singleton value among `agents`, tie-break lowest index.
pub(crate) fn argmax_singleton(
    inst: &Instance,
    agents: &[usize],
) -> Result<Option<usize>, MechanismError> {
    let oracle = inst.oracle();
    let mut best: Option<(usize, crate::rational::Rat)> = None;
    for &i in agents {
        let v = oracle.value(&[i].into_iter().collect())?;
        match &best {
            Some((_, bv)) if *bv >= v => {}
            _ => best = Some((i, v)),
        }
    }
    Ok(best.map(|(i, _)| i))
}
