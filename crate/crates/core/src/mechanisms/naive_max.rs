//! Deterministic max operator over the proportional-share rule: hold out the
//! best singleton, run the greedy rule on the rest at the full budget, and
//! allocate whichever of the two is worth more. The allocation is NOT
//! monotone in general (an agent can lose by lowering her bid when the
//! comparison flips), which is exactly why it ships: the truthfulness
//! auditor must flag it. Correctness of its payments is not claimed.

use std::collections::BTreeSet;

use super::greedy::greedy_order;
use super::payments::threshold_payments;
use super::{argmax_singleton, considered_agents, MechanismError};
use crate::model::{Instance, Outcome};

struct Analysis {
    rest: Vec<usize>,
    winners: Vec<usize>,
    imax: usize,
    greedy_wins: bool,
}

fn analyze(inst: &Instance) -> Result<Option<Analysis>, MechanismError> {
    let considered = considered_agents(inst);
    let imax = match argmax_singleton(inst, &considered)? {
        Some(i) => i,
        None => return Ok(None),
    };
    let rest: Vec<usize> = considered.iter().copied().filter(|&i| i != imax).collect();

    let oracle = inst.oracle();
    let (winners, greedy_value) = if rest.is_empty() {
        (Vec::new(), num::Zero::zero())
    } else {
        let trace = greedy_order(inst, &rest)?;
        let winners = trace.winners_at(&inst.costs, &inst.budget);
        let value = oracle.value(&winners.iter().copied().collect())?;
        (winners, value)
    };
    let imax_value = oracle.value(&[imax].into_iter().collect())?;
    Ok(Some(Analysis {
        rest,
        winners,
        imax,
        greedy_wins: greedy_value >= imax_value,
    }))
}

/// Winner set without payments.
pub(crate) fn naive_max_allocation(inst: &Instance) -> Result<BTreeSet<usize>, MechanismError> {
    Ok(match analyze(inst)? {
        None => BTreeSet::new(),
        Some(a) if a.greedy_wins => a.winners.iter().copied().collect(),
        Some(a) => [a.imax].into_iter().collect(),
    })
}

pub fn naive_max(inst: &Instance) -> Result<Outcome, MechanismError> {
    let a = match analyze(inst)? {
        Some(a) => a,
        None => return Ok(Outcome::empty(inst.n)),
    };
    if a.greedy_wins {
        if a.winners.is_empty() {
            return Ok(Outcome::empty(inst.n));
        }
        let details = threshold_payments(inst, &a.rest, &inst.budget)?;
        Ok(Outcome::new(
            inst.n,
            details
                .into_iter()
                .map(|d| (d.agent, d.theta.min(inst.budget.clone()))),
        ))
    } else {
        Ok(Outcome::new(inst.n, [(a.imax, inst.budget.clone())]))
    }
}
