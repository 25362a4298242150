//! Mechanism for matching (OXS) valuations. Edges are walked in static
//! weight-per-cost order; an edge sharing a vertex with the allocated prefix
//! contributes nothing, so it fails the allocation condition and the walk
//! stops there. The prefix therefore stays a legal matching. The heaviest
//! edge is held out and wins alone whenever the prefix is worth less.
//!
//! A winner's payment is capped by the cost-per-weight of her neighbors and
//! of the stop edge: bidding past either one pushes her behind an edge that
//! is examined first and either takes her vertex or halts the walk.

use std::collections::BTreeSet;

use num::Zero;

use super::greedy::{condition_holds, prefer};
use super::{considered_agents, MechanismError};
use crate::model::{Instance, Outcome};
use crate::rational::Rat;
use crate::valuation::{Edge, Valuation};

struct Analysis<'a> {
    edges: &'a [Edge],
    rest: Vec<usize>,
    prefix: Vec<usize>,
    stop_edge: Option<usize>,
    imax: usize,
    prefix_wins: bool,
}

fn analyze(inst: &Instance) -> Result<Option<Analysis<'_>>, MechanismError> {
    let edges = match &inst.valuation {
        Valuation::Matching { edges, .. } => edges,
        other => {
            return Err(MechanismError::WrongFamily {
                mechanism: "matching",
                expected: "matching",
                got: other.kind(),
            })
        }
    };
    let considered = considered_agents(inst);
    if considered.is_empty() {
        return Ok(None);
    }

    // Heaviest edge, tie-break lowest index; held out of the greedy walk.
    let imax = *considered
        .iter()
        .min_by(|&&a, &&b| edges[b].weight.cmp(&edges[a].weight).then(a.cmp(&b)))
        .expect("nonempty");
    let rest: Vec<usize> = considered.iter().copied().filter(|&e| e != imax).collect();

    let (prefix, stop_edge) = allocate_prefix(inst, edges, &rest);

    let oracle = inst.oracle();
    let prefix_value = oracle.value(&prefix.iter().copied().collect::<BTreeSet<_>>())?;
    let imax_value = oracle.value(&[imax].into_iter().collect())?;
    Ok(Some(Analysis {
        edges,
        rest,
        prefix,
        stop_edge,
        imax,
        prefix_wins: prefix_value >= imax_value,
    }))
}

/// Winner set without payments.
pub(crate) fn matching_allocation(inst: &Instance) -> Result<BTreeSet<usize>, MechanismError> {
    Ok(match analyze(inst)? {
        None => BTreeSet::new(),
        Some(a) if a.prefix_wins => a.prefix.iter().copied().collect(),
        Some(a) => [a.imax].into_iter().collect(),
    })
}

pub fn matching(inst: &Instance) -> Result<Outcome, MechanismError> {
    let a = match analyze(inst)? {
        Some(a) => a,
        None => return Ok(Outcome::empty(inst.n)),
    };
    let Analysis {
        edges,
        rest,
        prefix,
        stop_edge,
        imax,
        prefix_wins,
    } = a;

    if !prefix_wins {
        return Ok(Outcome::new(inst.n, [(imax, inst.budget.clone())]));
    }
    if prefix.is_empty() {
        return Ok(Outcome::empty(inst.n));
    }

    let weight_sum: Rat = prefix
        .iter()
        .fold(Rat::zero(), |a, &e| a + &edges[e].weight);
    let stop_ratio = stop_edge.and_then(|s| cost_per_weight(inst, edges, s));

    let out = Outcome::new(
        inst.n,
        prefix.iter().map(|&e| {
            let w = &edges[e].weight;
            if w.is_zero() {
                return (e, Rat::zero());
            }
            let mut pay = w * &inst.budget / &weight_sum;
            let mut best_ratio = stop_ratio.clone();
            for &d in &rest {
                if d != e && shares_vertex(&edges[d], &edges[e]) {
                    if let Some(r) = cost_per_weight(inst, edges, d) {
                        best_ratio = match best_ratio {
                            Some(b) => Some(b.min(r)),
                            None => Some(r),
                        };
                    }
                }
            }
            if let Some(r) = best_ratio {
                pay = pay.min(w * r);
            }
            (e, pay)
        }),
    );
    Ok(out)
}

/// Walks `rest` in weight-per-cost order (zero-cost first, ties by index),
/// allocating while the proportional-share condition holds for the edge's
/// marginal (its weight if vertex-compatible with the prefix, else zero).
/// Returns the prefix and the edge at which the walk stopped.
fn allocate_prefix(
    inst: &Instance,
    edges: &[Edge],
    rest: &[usize],
) -> (Vec<usize>, Option<usize>) {
    let mut order: Vec<usize> = rest.to_vec();
    order.sort_by(|&a, &b| {
        if prefer(
            &edges[a].weight,
            &inst.costs[a],
            a,
            &edges[b].weight,
            &inst.costs[b],
            b,
        ) {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    });

    let mut prefix = Vec::new();
    let mut used_left: BTreeSet<usize> = BTreeSet::new();
    let mut used_right: BTreeSet<usize> = BTreeSet::new();
    let mut prefix_value = Rat::zero();

    for &e in &order {
        let blocked = used_left.contains(&edges[e].left) || used_right.contains(&edges[e].right);
        let m = if blocked {
            Rat::zero()
        } else {
            edges[e].weight.clone()
        };
        let with = &prefix_value + &m;
        if !condition_holds(&inst.costs[e], &m, &with, &inst.budget) {
            return (prefix, Some(e));
        }
        prefix_value = with;
        if !blocked {
            used_left.insert(edges[e].left);
            used_right.insert(edges[e].right);
        }
        prefix.push(e);
    }
    (prefix, None)
}

fn shares_vertex(a: &Edge, b: &Edge) -> bool {
    a.left == b.left || a.right == b.right
}

/// c_e / w_e, or None for weightless edges (an infinite ratio never binds).
fn cost_per_weight(inst: &Instance, edges: &[Edge], e: usize) -> Option<Rat> {
    if edges[e].weight.is_zero() {
        None
    } else {
        Some(&inst.costs[e] / &edges[e].weight)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rint};

    fn edge(left: usize, right: usize, weight: i64) -> Edge {
        Edge {
            left,
            right,
            weight: rint(weight),
        }
    }

    fn instance(budget: i64, costs: &[i64], edges: Vec<Edge>) -> Instance {
        let (mut l, mut r) = (0, 0);
        for e in &edges {
            l = l.max(e.left + 1);
            r = r.max(e.right + 1);
        }
        Instance::new(
            rint(budget),
            costs.iter().map(|&c| rint(c)).collect(),
            Valuation::Matching {
                left_size: l,
                right_size: r,
                edges,
            },
        )
        .unwrap()
    }

    #[test]
    fn prefix_beats_heaviest_edge() {
        // Edges a-x(5), a-y(4), b-x(3), all cost 1, budget 4. The heaviest
        // edge is held out; the other two form a matching worth 7 >= 5.
        let inst = instance(4, &[1, 1, 1], vec![edge(0, 0, 5), edge(0, 1, 4), edge(1, 0, 3)]);
        let out = matching(&inst).unwrap();
        assert_eq!(out.winners, [1, 2].into_iter().collect());
        assert_eq!(out.payments[1], rat(16, 7));
        assert_eq!(out.payments[2], rat(12, 7));
        assert_eq!(out.total_payment(), rint(4));
    }

    #[test]
    fn single_edge_gets_budget() {
        let inst = instance(7, &[2], vec![edge(0, 0, 5)]);
        let out = matching(&inst).unwrap();
        assert_eq!(out.winners, [0].into_iter().collect());
        assert_eq!(out.payments[0], rint(7));
    }

    #[test]
    fn tie_goes_to_the_prefix() {
        // Prefix value equals the held-out weight: allocate the prefix.
        let inst = instance(10, &[1, 1, 1], vec![edge(0, 0, 4), edge(1, 1, 2), edge(2, 2, 2)]);
        let out = matching(&inst).unwrap();
        assert_eq!(out.winners, [1, 2].into_iter().collect());
    }

    #[test]
    fn blocked_edge_stops_the_walk() {
        // Both light edges touch vertex a; the second is blocked and halts
        // the walk, leaving a prefix lighter than the held-out edge.
        let inst = instance(
            20,
            &[1, 1, 5],
            vec![edge(0, 0, 4), edge(0, 1, 3), edge(1, 2, 9)],
        );
        let out = matching(&inst).unwrap();
        assert_eq!(out.winners, [2].into_iter().collect());
        assert_eq!(out.payments[2], rint(20));
    }

    #[test]
    fn blocked_stop_edge_caps_every_winner() {
        // imax = edge 3 (c-z, 7). Walk order over the rest by w/c:
        // a-x (6/1), b-y (5/1), then a-y (4/2) which is blocked at both
        // endpoints and stops the walk. Prefix {0,1} worth 11 >= 7.
        let inst = instance(
            12,
            &[1, 1, 2, 7],
            vec![edge(0, 0, 6), edge(1, 1, 5), edge(0, 1, 4), edge(2, 2, 7)],
        );
        let out = matching(&inst).unwrap();
        assert_eq!(out.winners, [0, 1].into_iter().collect());
        // Edge 1: stop ratio 2/4 = 1/2 is also its neighbor ratio:
        // min(5 * 12/11, 5/2) = 5/2. Bidding above 5/2 pushes it behind the
        // blocked edge, which halts the walk first.
        assert_eq!(out.payments[1], rat(5, 2));
        // Edge 0: same cap applies through the stop edge.
        assert_eq!(out.payments[0], rint(3));
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
            matching(&inst),
            Err(MechanismError::WrongFamily { .. })
        ));
    }
}
