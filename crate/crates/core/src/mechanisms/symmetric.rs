//! Mechanism for symmetric (cardinality-only) valuations: allocate to the
//! largest k cheapest agents with c_k <= B/k, pay each winner
//! min(B/k, c_{k+1}). The cap by the first excluded cost is what makes the
//! payments thresholds; `symmetric_flat_pay` drops it and is kept only as a
//! regression target for the truthfulness auditor.

use super::{considered_agents, MechanismError};
use crate::model::{Instance, Outcome};
use crate::rational::rint;
use crate::valuation::Valuation;

pub fn symmetric(inst: &Instance) -> Result<Outcome, MechanismError> {
    run(inst, true)
}

pub fn symmetric_flat_pay(inst: &Instance) -> Result<Outcome, MechanismError> {
    run(inst, false)
}

/// Winner set without payments (cost-sorted prefix of size k).
pub(crate) fn symmetric_allocation(
    inst: &Instance,
) -> Result<std::collections::BTreeSet<usize>, MechanismError> {
    let (order, k) = select(inst)?;
    Ok(order[..k].iter().copied().collect())
}

fn select(inst: &Instance) -> Result<(Vec<usize>, usize), MechanismError> {
    if !matches!(inst.valuation, Valuation::Symmetric { .. }) {
        return Err(MechanismError::WrongFamily {
            mechanism: "symmetric",
            expected: "symmetric",
            got: inst.valuation.kind(),
        });
    }
    let mut order = considered_agents(inst);
    order.sort_by(|&a, &b| inst.costs[a].cmp(&inst.costs[b]).then(a.cmp(&b)));

    let mut k = 0;
    for (pos, &agent) in order.iter().enumerate() {
        let count = rint(pos as i64 + 1);
        if &inst.costs[agent] * count <= inst.budget {
            k = pos + 1;
        } else {
            break;
        }
    }
    Ok((order, k))
}

fn run(inst: &Instance, cap_by_next_cost: bool) -> Result<Outcome, MechanismError> {
    let (order, k) = select(inst)?;
    if k == 0 {
        return Ok(Outcome::empty(inst.n));
    }
    let mut pay = &inst.budget / rint(k as i64);
    if cap_by_next_cost {
        if let Some(&next) = order.get(k) {
            pay = pay.min(inst.costs[next].clone());
        }
    }
    Ok(Outcome::new(
        inst.n,
        order[..k].iter().map(|&i| (i, pay.clone())),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate::{generate, Family, GenParams};
    use crate::rational::{rat, rint};
    use crate::valuation::Valuation;

    #[test]
    fn fixed_three_agent_instance() {
        // Costs (3, 49/10, 5), budget 10: k = 2 and both winners get
        // min(10/2, 5) = 5.
        let mut p = GenParams::default();
        p.eps = Some(rat(1, 10));
        let inst = generate(Family::AppendixA, &p, 0).unwrap();
        let out = symmetric(&inst).unwrap();
        assert_eq!(out.winners, [0, 1].into_iter().collect());
        assert_eq!(out.payments, vec![rint(5), rint(5), rint(0)]);
    }

    #[test]
    fn four_agent_example() {
        let inst = Instance::new(
            rint(6),
            vec![rint(1), rint(2), rint(3), rint(4)],
            Valuation::Symmetric {
                increments: vec![rint(1); 4],
            },
        )
        .unwrap();
        let out = symmetric(&inst).unwrap();
        // k = 2 (3 <= 6/3 fails); payment min(3, c_3) = 3.
        assert_eq!(out.winners, [0, 1].into_iter().collect());
        assert_eq!(out.payments[0], rint(3));
        assert_eq!(out.payments[1], rint(3));
    }

    #[test]
    fn lower_bound_instance_pays_almost_everything() {
        let mut p = GenParams::with_n(4);
        p.delta = Some(rat(1, 100));
        p.budget = Some(rint(1));
        let inst = generate(Family::SymmetricLb, &p, 0).unwrap();
        let out = symmetric(&inst).unwrap();
        assert_eq!(out.winners, [0].into_iter().collect());
        assert_eq!(out.payments[0], rat(99, 100));
    }

    #[test]
    fn all_agents_win_without_next_cost() {
        let inst = Instance::new(
            rint(9),
            vec![rint(1), rint(2), rint(3)],
            Valuation::Symmetric {
                increments: vec![rint(1); 3],
            },
        )
        .unwrap();
        let out = symmetric(&inst).unwrap();
        assert_eq!(out.winners.len(), 3);
        assert_eq!(out.payments[2], rint(3)); // B/k = 3, no c_{k+1}
    }

    #[test]
    fn empty_when_nothing_affordable() {
        let inst = Instance::new(
            rint(1),
            vec![rint(2), rint(3)],
            Valuation::Symmetric {
                increments: vec![rint(1); 2],
            },
        )
        .unwrap();
        let out = symmetric(&inst).unwrap();
        assert!(out.winners.is_empty());
        assert_eq!(out.total_payment(), rint(0));
    }

    #[test]
    fn wrong_family_rejected() {
        let inst = Instance::new(
            rint(1),
            vec![rint(1)],
            Valuation::Additive {
                values: vec![rint(1)],
            },
        )
        .unwrap();
        assert!(matches!(
            symmetric(&inst),
            Err(MechanismError::WrongFamily { .. })
        ));
    }
}
