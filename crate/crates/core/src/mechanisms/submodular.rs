//! Universally truthful mechanism for nondecreasing submodular valuations:
//! a fair coin between a proportional-share greedy branch (run at a reduced
//! budget over the cheap agents, with the best singleton held out and added
//! back) and the single best agent paid the whole budget.

use num::{BigInt, One};

use super::greedy::greedy_order;
use super::payments::threshold_payments;
use super::{argmax_singleton, considered_agents, MechanismError};
use crate::model::{Instance, Outcome, RandomizedOutcome};
use crate::rational::Rat;

/// Numerator of the greedy branch's budget fraction over denominator 1e18.
/// Fixed rational approximation of (e-1)/(12e-4), rounded down so that the
/// branch spends less than the exact analysis allows.
const BPRIME_FRACTION_NUM: u64 = 60_039_096_300_920_106;
const BPRIME_FRACTION_DEN: u64 = 1_000_000_000_000_000_000;

/// Reduced budget for the greedy branch.
pub fn bprime(budget: &Rat) -> Rat {
    budget
        * Rat::new(
            BigInt::from(BPRIME_FRACTION_NUM),
            BigInt::from(BPRIME_FRACTION_DEN),
        )
}

/// The explicit two-branch distribution, probability 1/2 each.
pub fn submodular(inst: &Instance) -> Result<RandomizedOutcome, MechanismError> {
    Ok(RandomizedOutcome::fair_coin(
        submodular_greedy_branch(inst)?,
        submodular_max_branch(inst)?,
    ))
}

/// Branch 2: the agent with the largest singleton value wins alone and is
/// paid the whole budget.
pub fn submodular_max_branch(inst: &Instance) -> Result<Outcome, MechanismError> {
    let considered = considered_agents(inst);
    match argmax_singleton(inst, &considered)? {
        Some(imax) => Ok(Outcome::new(inst.n, [(imax, inst.budget.clone())])),
        None => Ok(Outcome::empty(inst.n)),
    }
}

/// Winner set of the max branch without payments.
pub(crate) fn submodular_max_allocation(
    inst: &Instance,
) -> Result<std::collections::BTreeSet<usize>, MechanismError> {
    let considered = considered_agents(inst);
    Ok(argmax_singleton(inst, &considered)?
        .into_iter()
        .collect())
}

struct GreedyBranch {
    imax1: usize,
    rest: Vec<usize>,
    winners: Vec<usize>,
}

fn analyze_greedy_branch(inst: &Instance) -> Result<Option<GreedyBranch>, MechanismError> {
    let considered = considered_agents(inst);
    let imax = match argmax_singleton(inst, &considered)? {
        Some(i) => i,
        None => return Ok(None),
    };
    let half = &inst.budget / Rat::from_integer(BigInt::one() + BigInt::one());
    let x1: Vec<usize> = considered
        .iter()
        .copied()
        .filter(|&i| i != imax && inst.costs[i] <= half)
        .collect();
    if x1.is_empty() {
        return Ok(None);
    }
    let imax1 = argmax_singleton(inst, &x1)?.expect("x1 nonempty");
    let rest: Vec<usize> = x1.iter().copied().filter(|&i| i != imax1).collect();
    let winners = if rest.is_empty() {
        Vec::new()
    } else {
        let trace = greedy_order(inst, &rest)?;
        trace.winners_at(&inst.costs, &bprime(&inst.budget))
    };
    Ok(Some(GreedyBranch {
        imax1,
        rest,
        winners,
    }))
}

/// Winner set of the greedy branch without payments.
pub(crate) fn submodular_greedy_allocation(
    inst: &Instance,
) -> Result<std::collections::BTreeSet<usize>, MechanismError> {
    Ok(match analyze_greedy_branch(inst)? {
        None => Default::default(),
        Some(b) => b.winners.iter().copied().chain([b.imax1]).collect(),
    })
}

/// Branch 1: hold out the globally best singleton; among the remaining
/// agents cheaper than half the budget, hold out the best singleton again
/// (she wins unconditionally at half the budget) and run the proportional
/// share rule at the reduced budget on the rest. Threshold payments of the
/// greedy part are capped at half the budget.
pub fn submodular_greedy_branch(inst: &Instance) -> Result<Outcome, MechanismError> {
    let branch = match analyze_greedy_branch(inst)? {
        Some(b) => b,
        None => return Ok(Outcome::empty(inst.n)),
    };
    let half = &inst.budget / Rat::from_integer(BigInt::one() + BigInt::one());
    let mut pay: Vec<(usize, Rat)> = vec![(branch.imax1, half.clone())];
    if !branch.winners.is_empty() {
        let reduced = bprime(&inst.budget);
        for detail in threshold_payments(inst, &branch.rest, &reduced)? {
            pay.push((detail.agent, detail.theta.min(half.clone())));
        }
    }
    Ok(Outcome::new(inst.n, pay))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate::{generate, Family, GenParams};
    use crate::rational::{rat, rint};

    #[test]
    fn bprime_is_a_rounded_down_constant_fraction() {
        let b = bprime(&rint(1));
        assert_eq!(
            b,
            Rat::new(
                BigInt::from(60_039_096_300_920_106u64),
                BigInt::from(1_000_000_000_000_000_000u64)
            )
        );
        // Sanity interval: 0.0600390963 < (e-1)/(12e-4) < 0.0600390964.
        assert!(b > rat(600_390_963, 10_000_000_000));
        assert!(b < rat(600_390_964, 10_000_000_000));
    }

    #[test]
    fn coverage_regression_instance() {
        // Costs (1/100, 7/24, 1/2), budget 1. The best singleton (7) is held
        // out; among the cheap rest the best singleton (6) wins at 1/2; the
        // remaining agent's cost 7/24 exceeds the reduced budget share, so
        // the greedy part is empty.
        let inst = generate(Family::AppendixBCoverage, &GenParams::default(), 0).unwrap();
        let rand = submodular(&inst).unwrap();
        assert_eq!(rand.branches.len(), 2);
        assert_eq!(rand.branches[0].prob, rat(1, 2));
        assert_eq!(rand.branches[1].prob, rat(1, 2));

        let greedy = &rand.branches[0].outcome;
        assert_eq!(greedy.winners, [2].into_iter().collect());
        assert_eq!(greedy.payments[2], rat(1, 2));

        let max = &rand.branches[1].outcome;
        assert_eq!(max.winners, [0].into_iter().collect());
        assert_eq!(max.payments[0], rint(1));

        // Expected value (6 + 7)/2 = 13/2.
        assert_eq!(rand.expected_value(&inst), rat(13, 2));
    }

    #[test]
    fn empty_cheap_set_degenerates() {
        let inst = Instance::new(
            rint(2),
            vec![rat(3, 2), rat(3, 2)],
            crate::valuation::Valuation::Additive {
                values: vec![rint(5), rint(4)],
            },
        )
        .unwrap();
        // Both costs exceed B/2 = 1; the greedy branch is empty, the max
        // branch pays the budget to the better agent.
        let rand = submodular(&inst).unwrap();
        assert!(rand.branches[0].outcome.winners.is_empty());
        assert_eq!(
            rand.branches[1].outcome.winners,
            [0].into_iter().collect()
        );
        assert_eq!(rand.branches[1].outcome.payments[0], rint(2));
    }

    #[test]
    fn probabilities_always_sum_to_one() {
        for family in [
            Family::RandomSymmetric,
            Family::RandomAdditive,
            Family::RandomCoverage,
            Family::RandomMatching,
        ] {
            for seed in 0..6 {
                let inst = generate(family, &GenParams::with_n(5), seed).unwrap();
                let rand = submodular(&inst).unwrap();
                rand.validate(inst.n).unwrap();
            }
        }
    }

    #[test]
    fn branch_payments_stay_within_budget() {
        for seed in 0..20 {
            let inst = generate(Family::RandomCoverage, &GenParams::with_n(7), seed).unwrap();
            let rand = submodular(&inst).unwrap();
            for branch in &rand.branches {
                assert!(branch.outcome.total_payment() <= inst.budget);
                for &w in &branch.outcome.winners {
                    assert!(branch.outcome.payments[w] >= inst.costs[w], "IR seed {seed}");
                }
            }
        }
    }
}
