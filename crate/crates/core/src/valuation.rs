//! Set-function valuation families behind a uniform value-query oracle.
//!
//! Four core families (symmetric, additive, coverage, matching/OXS) are all
//! nondecreasing submodular; `Corkscrew` is a deliberately non-submodular
//! gated family used to exercise the unbounded-ratio regime. The oracle
//! counts queries so polynomial query usage can be reported empirically.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};

use num::{BigInt, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{rat_string, rat_vec, Rat};

/// Agent subsets are sorted index sets over `0..n`.
pub type AgentSet = BTreeSet<usize>;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum ValuationError {
    #[error("agent index {agent} out of range for {n} agents")]
    AgentOutOfRange { agent: usize, n: usize },
    #[error("agent {0} is already in the subset")]
    AgentInSubset(usize),
    #[error("symmetric increments must be nonincreasing (violated at position {0})")]
    NotNonincreasing(usize),
    #[error("negative value or weight at position {0}")]
    NegativeValue(usize),
    #[error("coverage set {set} contains element {element} outside ground set of size {ground}")]
    ElementOutOfRange {
        set: usize,
        element: usize,
        ground: usize,
    },
    #[error("matching edge {edge} endpoint out of range")]
    EndpointOutOfRange { edge: usize },
    #[error("essential agent index {essential} out of range for {n} agents")]
    EssentialOutOfRange { essential: usize, n: usize },
}

/// One edge of a bipartite matching valuation. Serializes as the triple
/// `[left, right, "w"]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub left: usize,
    pub right: usize,
    pub weight: Rat,
}

impl Serialize for Edge {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        use crate::rational::format_rat;
        (self.left, self.right, format_rat(&self.weight)).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Edge {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use crate::rational::parse_rat;
        let (left, right, weight) = <(usize, usize, String)>::deserialize(de)?;
        Ok(Edge {
            left,
            right,
            weight: parse_rat(&weight).map_err(serde::de::Error::custom)?,
        })
    }
}

/// Tagged union of the supported valuation families. One agent per
/// increment/value/set/edge; the family is immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Valuation {
    /// Value depends only on cardinality: V(S) = sum of the first |S|
    /// increments, with r1 >= r2 >= ... >= rn >= 0.
    Symmetric {
        #[serde(with = "rat_vec")]
        increments: Vec<Rat>,
    },
    /// V(S) = sum of per-agent values.
    Additive {
        #[serde(with = "rat_vec")]
        values: Vec<Rat>,
    },
    /// V(S) = |union of the agents' subsets of a ground set|.
    Coverage {
        ground_size: usize,
        sets: Vec<BTreeSet<usize>>,
    },
    /// OXS: V(S) = weight of the maximum matching among the edges in S.
    Matching {
        left_size: usize,
        right_size: usize,
        edges: Vec<Edge>,
    },
    /// V(S) = unit * |S| when the essential agent is in S, else 0.
    /// Nondecreasing but intentionally not submodular.
    Corkscrew {
        essential: usize,
        #[serde(with = "rat_string")]
        unit: Rat,
    },
}

impl Valuation {
    /// Number of agents the valuation is defined over. `Corkscrew` carries no
    /// per-agent data, so its arity comes from the enclosing instance and this
    /// returns `None`.
    pub fn arity(&self) -> Option<usize> {
        match self {
            Valuation::Symmetric { increments } => Some(increments.len()),
            Valuation::Additive { values } => Some(values.len()),
            Valuation::Coverage { sets, .. } => Some(sets.len()),
            Valuation::Matching { edges, .. } => Some(edges.len()),
            Valuation::Corkscrew { .. } => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Valuation::Symmetric { .. } => "symmetric",
            Valuation::Additive { .. } => "additive",
            Valuation::Coverage { .. } => "coverage",
            Valuation::Matching { .. } => "matching",
            Valuation::Corkscrew { .. } => "corkscrew",
        }
    }

    /// Family-level invariants (monotonicity of increments, nonnegative
    /// weights, sets within the ground set, endpoints within part sizes).
    pub fn validate(&self, n: usize) -> Result<(), ValuationError> {
        match self {
            Valuation::Symmetric { increments } => {
                for (i, w) in increments.windows(2).enumerate() {
                    if w[0] < w[1] {
                        return Err(ValuationError::NotNonincreasing(i + 1));
                    }
                }
                if let Some((i, _)) = increments
                    .iter()
                    .enumerate()
                    .find(|(_, r)| **r < Rat::zero())
                {
                    return Err(ValuationError::NegativeValue(i));
                }
                Ok(())
            }
            Valuation::Additive { values } => {
                if let Some((i, _)) = values.iter().enumerate().find(|(_, v)| **v < Rat::zero()) {
                    return Err(ValuationError::NegativeValue(i));
                }
                Ok(())
            }
            Valuation::Coverage { ground_size, sets } => {
                for (si, set) in sets.iter().enumerate() {
                    if let Some(&e) = set.iter().find(|&&e| e >= *ground_size) {
                        return Err(ValuationError::ElementOutOfRange {
                            set: si,
                            element: e,
                            ground: *ground_size,
                        });
                    }
                }
                Ok(())
            }
            Valuation::Matching {
                left_size,
                right_size,
                edges,
            } => {
                for (ei, e) in edges.iter().enumerate() {
                    if e.left >= *left_size || e.right >= *right_size {
                        return Err(ValuationError::EndpointOutOfRange { edge: ei });
                    }
                    if e.weight < Rat::zero() {
                        return Err(ValuationError::NegativeValue(ei));
                    }
                }
                Ok(())
            }
            Valuation::Corkscrew { essential, unit } => {
                if *essential >= n {
                    return Err(ValuationError::EssentialOutOfRange {
                        essential: *essential,
                        n,
                    });
                }
                if *unit < Rat::zero() {
                    return Err(ValuationError::NegativeValue(0));
                }
                Ok(())
            }
        }
    }

}

/// Precomputed evaluation state: prefix sums for symmetric families and
/// bitset rows for coverage, built once per oracle so repeated queries stay
/// cheap.
enum EvalPlan<'a> {
    Symmetric { prefix: Vec<Rat> },
    Additive { values: &'a [Rat] },
    Coverage { masks: Vec<Vec<u64>>, words: usize },
    Matching { edges: &'a [Edge] },
    Corkscrew { essential: usize, unit: &'a Rat },
}

impl<'a> EvalPlan<'a> {
    fn new(v: &'a Valuation) -> Self {
        match v {
            Valuation::Symmetric { increments } => {
                let mut prefix = Vec::with_capacity(increments.len() + 1);
                prefix.push(Rat::zero());
                for r in increments {
                    prefix.push(prefix.last().unwrap() + r);
                }
                EvalPlan::Symmetric { prefix }
            }
            Valuation::Additive { values } => EvalPlan::Additive { values },
            Valuation::Coverage { ground_size, sets } => {
                let words = ground_size / 64 + 1;
                let masks = sets
                    .iter()
                    .map(|set| {
                        let mut row = vec![0u64; words];
                        for &e in set {
                            row[e / 64] |= 1 << (e % 64);
                        }
                        row
                    })
                    .collect();
                EvalPlan::Coverage { masks, words }
            }
            Valuation::Matching { edges, .. } => EvalPlan::Matching { edges },
            Valuation::Corkscrew { essential, unit } => EvalPlan::Corkscrew {
                essential: *essential,
                unit,
            },
        }
    }

    fn eval(&self, subset: &AgentSet) -> Rat {
        match self {
            EvalPlan::Symmetric { prefix } => prefix[subset.len().min(prefix.len() - 1)].clone(),
            EvalPlan::Additive { values } => subset
                .iter()
                .fold(Rat::zero(), |acc, &i| acc + &values[i]),
            EvalPlan::Coverage { masks, words } => {
                let mut covered = vec![0u64; *words];
                for &i in subset {
                    for (w, m) in covered.iter_mut().zip(&masks[i]) {
                        *w |= m;
                    }
                }
                let count: u32 = covered.iter().map(|w| w.count_ones()).sum();
                Rat::from_integer(BigInt::from(count))
            }
            EvalPlan::Matching { edges } => {
                let chosen: Vec<&Edge> = subset.iter().map(|&i| &edges[i]).collect();
                max_weight_matching(&chosen)
            }
            EvalPlan::Corkscrew { essential, unit } => {
                if subset.contains(essential) {
                    *unit * Rat::from_integer(BigInt::from(subset.len()))
                } else {
                    Rat::zero()
                }
            }
        }
    }
}

/// Exact maximum-weight matching over a small edge list, by include/exclude
/// recursion with a remaining-weight bound. Desk scale (edge lists of ~16).
fn max_weight_matching(edges: &[&Edge]) -> Rat {
    fn go(
        edges: &[&Edge],
        idx: usize,
        used_left: &mut BTreeSet<usize>,
        used_right: &mut BTreeSet<usize>,
        acc: Rat,
        best: &mut Rat,
        suffix: &[Rat],
    ) {
        if idx == edges.len() {
            if acc > *best {
                *best = acc;
            }
            return;
        }
        if &acc + &suffix[idx] <= *best {
            return;
        }
        let e = edges[idx];
        if !used_left.contains(&e.left) && !used_right.contains(&e.right) {
            used_left.insert(e.left);
            used_right.insert(e.right);
            go(
                edges,
                idx + 1,
                used_left,
                used_right,
                &acc + &e.weight,
                best,
                suffix,
            );
            used_left.remove(&e.left);
            used_right.remove(&e.right);
        }
        go(edges, idx + 1, used_left, used_right, acc, best, suffix);
    }

    // suffix[i] = total weight of edges[i..], for pruning
    let mut suffix = vec![Rat::zero(); edges.len() + 1];
    for i in (0..edges.len()).rev() {
        suffix[i] = &suffix[i + 1] + &edges[i].weight;
    }
    let mut best = Rat::zero();
    go(
        edges,
        0,
        &mut BTreeSet::new(),
        &mut BTreeSet::new(),
        Rat::zero(),
        &mut best,
        &suffix,
    );
    best
}

/// Value-query oracle over a valuation. The query counter is advisory and
/// atomic, so a single oracle may be shared across threads.
pub struct ValueOracle<'a> {
    valuation: &'a Valuation,
    plan: EvalPlan<'a>,
    n: usize,
    queries: AtomicU64,
}

impl<'a> ValueOracle<'a> {
    pub fn new(valuation: &'a Valuation, n: usize) -> Self {
        ValueOracle {
            valuation,
            plan: EvalPlan::new(valuation),
            n,
            queries: AtomicU64::new(0),
        }
    }

    pub fn valuation(&self) -> &Valuation {
        self.valuation
    }

    /// V(S). Counts exactly one query.
    pub fn value(&self, subset: &AgentSet) -> Result<Rat, ValuationError> {
        if let Some(&bad) = subset.iter().find(|&&i| i >= self.n) {
            return Err(ValuationError::AgentOutOfRange {
                agent: bad,
                n: self.n,
            });
        }
        self.queries.fetch_add(1, Ordering::Relaxed);
        Ok(self.plan.eval(subset))
    }

    /// V(S + i) - V(S), for i not in S. Counts two queries.
    pub fn marginal(&self, agent: usize, subset: &AgentSet) -> Result<Rat, ValuationError> {
        if subset.contains(&agent) {
            return Err(ValuationError::AgentInSubset(agent));
        }
        let mut with = subset.clone();
        with.insert(agent);
        let hi = self.value(&with)?;
        let lo = self.value(subset)?;
        Ok(hi - lo)
    }

    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

/// Exhaustively verifies V(S) <= V(T) for all S ⊆ T. Ground truth for small n.
pub fn exhaustive_nondecreasing(v: &Valuation, n: usize) -> bool {
    assert!(n <= 12, "exhaustive check limited to n <= 12");
    let oracle = ValueOracle::new(v, n);
    let values: Vec<Rat> = (0u32..1 << n)
        .map(|mask| oracle.value(&mask_to_set(mask)).unwrap())
        .collect();
    for mask in 0u32..1 << n {
        for i in 0..n {
            if mask & (1 << i) == 0 && values[(mask | (1 << i)) as usize] < values[mask as usize] {
                return false;
            }
        }
    }
    true
}

/// Exhaustively verifies decreasing marginals: for all S and i,j not in S,
/// V(S+i) - V(S) >= V(S+i+j) - V(S+j).
pub fn exhaustive_submodular(v: &Valuation, n: usize) -> bool {
    assert!(n <= 10, "exhaustive check limited to n <= 10");
    let oracle = ValueOracle::new(v, n);
    let values: Vec<Rat> = (0u32..1 << n)
        .map(|mask| oracle.value(&mask_to_set(mask)).unwrap())
        .collect();
    for mask in 0u32..1 << n {
        for i in 0..n {
            if mask & (1 << i) != 0 {
                continue;
            }
            for j in 0..n {
                if j == i || mask & (1 << j) != 0 {
                    continue;
                }
                let gain_small = &values[(mask | (1 << i)) as usize] - &values[mask as usize];
                let gain_large = &values[(mask | (1 << i) | (1 << j)) as usize]
                    - &values[(mask | (1 << j)) as usize];
                if gain_small < gain_large {
                    return false;
                }
            }
        }
    }
    true
}

pub fn mask_to_set(mask: u32) -> AgentSet {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}
