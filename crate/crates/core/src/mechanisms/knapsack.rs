//! Mechanism for additive valuations. Greedy by value-per-cost under the
//! proportional-share stopping rule; if the prefix (without the best single
//! agent) is worth more than that agent it wins with proportional payments,
//! otherwise the best single agent wins at her own threshold.

use std::collections::BTreeSet;

use num::Zero;

use super::greedy::{condition_holds, prefer};
use super::{considered_agents, MechanismError};
use crate::model::{Instance, Outcome};
use crate::rational::Rat;
use crate::valuation::Valuation;

struct Analysis<'a> {
    values: &'a [Rat],
    order: Vec<usize>,
    k: usize,
    prefix_value: Rat,
    istar: usize,
    /// Prefix wins when its value without the best agent strictly exceeds
    /// the best agent's value.
    prefix_wins: bool,
}

fn analyze(inst: &Instance) -> Result<Option<Analysis<'_>>, MechanismError> {
    let values = match &inst.valuation {
        Valuation::Additive { values } => values,
        other => {
            return Err(MechanismError::WrongFamily {
                mechanism: "knapsack",
                expected: "additive",
                got: other.kind(),
            })
        }
    };
    let mut order = considered_agents(inst);
    if order.is_empty() {
        return Ok(None);
    }
    order.sort_by(|&a, &b| {
        if prefer(&values[a], &inst.costs[a], a, &values[b], &inst.costs[b], b) {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    });

    // Maximal prefix [k] under c_i <= B * v_i / sum_{j<=i} v_j.
    let mut k = 0;
    let mut prefix_value = Rat::zero();
    for &agent in &order {
        let with = &prefix_value + &values[agent];
        if condition_holds(&inst.costs[agent], &values[agent], &with, &inst.budget) {
            prefix_value = with;
            k += 1;
        } else {
            break;
        }
    }

    // Best single agent over everyone considered, tie-break lowest index.
    let istar = *order
        .iter()
        .min_by(|&&a, &&b| values[b].cmp(&values[a]).then(a.cmp(&b)))
        .expect("nonempty");
    if values[istar].is_zero() {
        // Nothing has value; allocate nothing.
        return Ok(None);
    }

    let prefix_minus_star: Rat = order[..k]
        .iter()
        .filter(|&&i| i != istar)
        .fold(Rat::zero(), |a, &i| a + &values[i]);
    let prefix_wins = prefix_minus_star > values[istar];

    Ok(Some(Analysis {
        values,
        order,
        k,
        prefix_value,
        istar,
        prefix_wins,
    }))
}

/// Winner set without payments.
pub(crate) fn knapsack_allocation(inst: &Instance) -> Result<BTreeSet<usize>, MechanismError> {
    Ok(match analyze(inst)? {
        None => BTreeSet::new(),
        Some(a) if a.prefix_wins => a.order[..a.k].iter().copied().collect(),
        Some(a) => [a.istar].into_iter().collect(),
    })
}

pub fn knapsack(inst: &Instance) -> Result<Outcome, MechanismError> {
    let a = match analyze(inst)? {
        Some(a) => a,
        None => return Ok(Outcome::empty(inst.n)),
    };
    let Analysis {
        values,
        order,
        k,
        prefix_value,
        istar,
        prefix_wins,
    } = a;

    if prefix_wins {
        // theta_i = min(v_i * c_{k+1} / v_{k+1}, v_i * B / prefix sum).
        let share = &inst.budget / &prefix_value;
        let next_ratio: Option<Rat> = order.get(k).and_then(|&next| {
            if values[next].is_zero() {
                None
            } else {
                Some(&inst.costs[next] / &values[next])
            }
        });
        Ok(Outcome::new(
            inst.n,
            order[..k].iter().map(|&i| {
                let base = &values[i] * &share;
                let pay = match &next_ratio {
                    Some(r) => base.min(&values[i] * r),
                    None => base,
                };
                (i, pay)
            }),
        ))
    } else {
        // The best single agent wins. Her threshold is set by the first
        // position r (in the full order, her value excluded from the sums)
        // where the remaining agents strictly out-value her and still
        // satisfy the allocation condition. Strictness mirrors the branch
        // test above: at an exact value tie the single agent still wins, so
        // a tie position cannot be her threshold.
        let mut sum_wo_star = Rat::zero();
        let mut theta = inst.budget.clone();
        for &agent in &order {
            if agent != istar {
                sum_wo_star += &values[agent];
            }
            if sum_wo_star <= values[istar] {
                continue;
            }
            let cond = if inst.costs[agent].is_zero() {
                true
            } else {
                &inst.costs[agent] * &sum_wo_star <= &inst.budget * &values[agent]
            };
            if cond {
                // Bid that keeps istar ahead of this position.
                theta = if inst.costs[agent].is_zero() {
                    Rat::zero()
                } else {
                    &values[istar] * &inst.costs[agent] / &values[agent]
                };
                break;
            }
        }
        Ok(Outcome::new(inst.n, [(istar, theta)]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rint;

    fn additive(budget: i64, costs: &[i64], values: &[i64]) -> Instance {
        Instance::new(
            rint(budget),
            costs.iter().map(|&c| rint(c)).collect(),
            Valuation::Additive {
                values: values.iter().map(|&v| rint(v)).collect(),
            },
        )
        .unwrap()
    }

    #[test]
    fn single_strong_agent_takes_all() {
        // Prefix stops at k = 2; the best agent is worth more than the rest
        // of the prefix. No position strictly out-values her, so her
        // threshold is the whole budget.
        let inst = additive(6, &[2, 2, 2], &[6, 4, 2]);
        let out = knapsack(&inst).unwrap();
        assert_eq!(out.winners, [0].into_iter().collect());
        assert_eq!(out.payments[0], rint(6));
    }

    #[test]
    fn sole_agent_gets_budget() {
        let inst = additive(10, &[1], &[5]);
        let out = knapsack(&inst).unwrap();
        assert_eq!(out.winners, [0].into_iter().collect());
        assert_eq!(out.payments[0], rint(10));
    }

    #[test]
    fn uniform_agents_split_budget_exactly() {
        let inst = additive(3, &[1, 1, 1], &[1, 1, 1]);
        let out = knapsack(&inst).unwrap();
        assert_eq!(out.winners.len(), 3);
        assert_eq!(out.payments, vec![rint(1), rint(1), rint(1)]);
        assert_eq!(out.total_payment(), inst.budget);
    }

    #[test]
    fn prefix_branch_pays_proportional_shares() {
        let inst = additive(4, &[1, 1, 1, 1], &[3, 3, 3, 2]);
        let out = knapsack(&inst).unwrap();
        // Ratios 3,3,3,2; prefix k = 3; remaining value 6 > 3 = best single.
        assert_eq!(out.winners, [0, 1, 2].into_iter().collect());
        // theta = min(3 * c4/v4, 3 * 4/9) = min(3/2, 4/3) = 4/3.
        assert_eq!(out.payments[0], crate::rational::rat(4, 3));
    }

    #[test]
    fn single_agent_threshold_respects_strict_out_value() {
        // Values (5,3,3,3), costs 1, budget 3: the prefix stops at k = 2,
        // the best agent keeps her slot, and the first position whose
        // running sum strictly exceeds 5 is the third: theta = 5 * 1/3.
        let inst = additive(3, &[1, 1, 1, 1], &[5, 3, 3, 3]);
        let out = knapsack(&inst).unwrap();
        assert_eq!(out.winners, [0].into_iter().collect());
        assert_eq!(out.payments[0], crate::rational::rat(5, 3));
    }

    #[test]
    fn wrong_family_rejected() {
        let inst = Instance::new(
            rint(1),
            vec![rint(1)],
            Valuation::Symmetric {
                increments: vec![rint(1)],
            },
        )
        .unwrap();
        assert!(matches!(
            knapsack(&inst),
            Err(MechanismError::WrongFamily { .. })
        ));
    }
}
