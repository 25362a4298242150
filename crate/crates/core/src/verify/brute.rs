//! Exhaustive budget-constrained optimum by full subset enumeration through
//! the value oracle, with cost pruning. Refuses instances too large to
//! enumerate rather than approximating silently.

use num::Zero;

use super::VerifyError;
use crate::model::Instance;
use crate::rational::Rat;
use crate::valuation::{AgentSet, ValueOracle};

pub const BRUTE_FORCE_MAX_N: usize = 22;

/// Exact maximum of V(S) over subsets with total cost within the budget.
/// Ties break toward the lexicographically smallest subset.
pub fn brute_force_opt(inst: &Instance) -> Result<(AgentSet, Rat), VerifyError> {
    if inst.n > BRUTE_FORCE_MAX_N {
        return Err(VerifyError::TooLarge {
            n: inst.n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    let oracle = inst.oracle();
    let mut best_set = AgentSet::new();
    let mut best_value = oracle.value(&best_set)?;
    let mut current = AgentSet::new();
    let mut cost = Rat::zero();
    descend(
        inst,
        &oracle,
        0,
        &mut current,
        &mut cost,
        &mut best_set,
        &mut best_value,
    )?;
    Ok((best_set, best_value))
}

fn descend(
    inst: &Instance,
    oracle: &ValueOracle<'_>,
    agent: usize,
    current: &mut AgentSet,
    cost: &mut Rat,
    best_set: &mut AgentSet,
    best_value: &mut Rat,
) -> Result<(), VerifyError> {
    if agent == inst.n {
        let value = oracle.value(current)?;
        if value > *best_value || (value == *best_value && lex_less(current, best_set)) {
            *best_value = value;
            *best_set = current.clone();
        }
        return Ok(());
    }
    // Include the agent when still affordable; supersets of an unaffordable
    // prefix are all unaffordable.
    let with_cost = &*cost + &inst.costs[agent];
    if with_cost <= inst.budget {
        current.insert(agent);
        let saved = std::mem::replace(cost, with_cost);
        descend(inst, oracle, agent + 1, current, cost, best_set, best_value)?;
        *cost = saved;
        current.remove(&agent);
    }
    descend(inst, oracle, agent + 1, current, cost, best_set, best_value)
}

fn lex_less(a: &AgentSet, b: &AgentSet) -> bool {
    a.iter().lt(b.iter())
}
