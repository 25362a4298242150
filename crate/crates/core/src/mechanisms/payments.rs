//! Threshold payments for the proportional-share rule, computed by the
//! position-by-position characterization: rerun the greedy order without the
//! winner, and at each position take the bid that is still small enough to
//! claim the slot (`cbar`) capped by the allocation condition there (`rho`);
//! the threshold is the maximum over positions.

use num::Zero;

use super::greedy::{feasible_prefix_len, greedy_order_with};
use super::MechanismError;
use crate::model::Instance;
use crate::rational::Rat;
use crate::valuation::AgentSet;

/// Evidence for one winner's threshold payment.
#[derive(Debug, Clone)]
pub struct ThresholdDetail {
    pub agent: usize,
    pub theta: Rat,
    /// 1-based position in the winner-removed order attaining the maximum.
    pub witness: usize,
    /// Bid that would claim the witness position (None = unconstrained).
    pub cbar: Option<Rat>,
    /// Proportional-share cap at the witness position (None = unconstrained).
    pub rho: Option<Rat>,
}

/// Largest bid that places an agent with marginal `vij` weakly ahead of an
/// occupant with marginal `occ_v` and cost `occ_c`. `None` means any bid
/// works (the occupant has no claim to the slot).
fn bid_to_precede(vij: &Rat, occ_v: &Rat, occ_c: &Rat) -> Option<Rat> {
    if occ_c.is_zero() {
        // Zero-cost occupants sort first; only a zero bid ties.
        Some(Rat::zero())
    } else if occ_v.is_zero() {
        None
    } else {
        Some(vij * occ_c / occ_v)
    }
}

/// Threshold payments of the proportional-share rule for the winners of
/// `proportional_share_rule(inst, subset, budget)`.
pub fn threshold_payments(
    inst: &Instance,
    subset: &[usize],
    budget: &Rat,
) -> Result<Vec<ThresholdDetail>, MechanismError> {
    let oracle = inst.oracle();
    let base = greedy_order_with(inst, &oracle, subset)?;
    let winners = base.winners_at(&inst.costs, budget);
    if winners.is_empty() {
        return Err(MechanismError::NoWinners);
    }

    let mut details = Vec::with_capacity(winners.len());
    for &agent in &winners {
        let others: Vec<usize> = subset.iter().copied().filter(|&j| j != agent).collect();

        let (order, marginals, prefix_len) = if others.is_empty() {
            (Vec::new(), Vec::new(), 0)
        } else {
            let trace = greedy_order_with(inst, &oracle, &others)?;
            let k = feasible_prefix_len(&trace, &inst.costs, budget);
            (trace.order, trace.marginals, k)
        };

        let mut detail = ThresholdDetail {
            agent,
            theta: Rat::zero(),
            witness: 0,
            cbar: None,
            rho: None,
        };
        let mut prefix: AgentSet = AgentSet::new();
        let mut prefix_value = Rat::zero();

        for j in 1..=prefix_len + 1 {
            let vij = oracle.marginal(agent, &prefix)?;
            let (candidate, cbar, rho);
            if vij.is_zero() {
                // The slot is worthless to the agent, so only a zero bid
                // could ever claim it.
                candidate = Rat::zero();
                cbar = None;
                rho = None;
            } else {
                let r = budget * &vij / (&prefix_value + &vij);
                let cb = if j <= order.len() {
                    bid_to_precede(&vij, &marginals[j - 1], &inst.costs[order[j - 1]])
                } else {
                    None
                };
                candidate = match &cb {
                    Some(c) => c.min(&r).clone(),
                    None => r.clone(),
                };
                cbar = cb;
                rho = Some(r);
            }
            if detail.witness == 0 || candidate > detail.theta {
                detail.theta = candidate;
                detail.witness = j;
                detail.cbar = cbar;
                detail.rho = rho;
            }
            if j <= order.len() {
                prefix.insert(order[j - 1]);
                prefix_value += &marginals[j - 1];
            }
        }

        debug_assert!(
            detail.theta >= inst.costs[agent],
            "threshold below cost for agent {agent}"
        );
        details.push(detail);
    }
    Ok(details)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rint};
    use crate::valuation::Valuation;

    #[test]
    fn additive_example_thresholds() {
        let inst = Instance::new(
            rint(6),
            vec![rint(2), rint(2), rint(2)],
            Valuation::Additive {
                values: vec![rint(6), rint(4), rint(2)],
            },
        )
        .unwrap();
        let details = threshold_payments(&inst, &[0, 1, 2], &rint(6)).unwrap();
        assert_eq!(details.len(), 2);
        assert_eq!(details[0].agent, 0);
        assert_eq!(details[0].theta, rat(18, 5));
        assert_eq!(details[1].agent, 1);
        assert_eq!(details[1].theta, rat(12, 5));
    }

    #[test]
    fn sole_agent_threshold_is_the_budget() {
        let inst = Instance::new(
            rint(10),
            vec![rint(1)],
            Valuation::Additive {
                values: vec![rint(5)],
            },
        )
        .unwrap();
        let details = threshold_payments(&inst, &[0], &rint(10)).unwrap();
        assert_eq!(details[0].theta, rint(10));
        assert_eq!(details[0].witness, 1);
    }

    #[test]
    fn thresholds_are_individually_rational() {
        use crate::model::generate::{generate, Family, GenParams};
        for family in [
            Family::RandomSymmetric,
            Family::RandomAdditive,
            Family::RandomCoverage,
            Family::RandomMatching,
        ] {
            for seed in 0..15 {
                let inst = generate(family, &GenParams::with_n(6), seed).unwrap();
                let subset: Vec<usize> = (0..inst.n).collect();
                let budget = inst.budget.clone();
                match threshold_payments(&inst, &subset, &budget) {
                    Ok(details) => {
                        for d in &details {
                            assert!(
                                d.theta >= inst.costs[d.agent],
                                "{family} seed {seed} agent {}",
                                d.agent
                            );
                        }
                    }
                    Err(MechanismError::NoWinners) => {}
                    Err(e) => panic!("{family} seed {seed}: {e}"),
                }
            }
        }
    }

    #[test]
    fn no_winners_is_an_error() {
        let inst = Instance::new(
            rint(1),
            vec![rint(5), rint(5)],
            Valuation::Additive {
                values: vec![rint(1), rint(1)],
            },
        )
        .unwrap();
        assert!(matches!(
            threshold_payments(&inst, &[0, 1], &rint(1)),
            Err(MechanismError::NoWinners)
        ));
    }

    #[test]
    fn zero_cost_winner_gets_zero_threshold_when_worthless() {
        // A zero-cost agent with no marginal value wins but can only ever
        // bid zero, so her threshold is zero.
        let inst = Instance::new(
            rint(4),
            vec![rint(1), rint(0)],
            Valuation::Additive {
                values: vec![rint(3), rint(0)],
            },
        )
        .unwrap();
        let details = threshold_payments(&inst, &[0, 1], &rint(4)).unwrap();
        let zero_agent = details.iter().find(|d| d.agent == 1).unwrap();
        assert_eq!(zero_agent.theta, rint(0));
    }
}
