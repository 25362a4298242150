//! Deterministic instance generators: random families plus the fixed
//! constructions used as regression targets.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num::{BigInt, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Instance, ModelError};
use crate::rational::{format_rat, rat, rint, Rat};
use crate::valuation::{Edge, Valuation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    RandomSymmetric,
    RandomAdditive,
    RandomCoverage,
    RandomMatching,
    SymmetricLb,
    AdditiveLb,
    AppendixA,
    AppendixBCoverage,
    ShapleyChain,
    Corkscrew,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::RandomSymmetric,
        Family::RandomAdditive,
        Family::RandomCoverage,
        Family::RandomMatching,
        Family::SymmetricLb,
        Family::AdditiveLb,
        Family::AppendixA,
        Family::AppendixBCoverage,
        Family::ShapleyChain,
        Family::Corkscrew,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::RandomSymmetric => "random_symmetric",
            Family::RandomAdditive => "random_additive",
            Family::RandomCoverage => "random_coverage",
            Family::RandomMatching => "random_matching",
            Family::SymmetricLb => "symmetric_lb",
            Family::AdditiveLb => "additive_lb",
            Family::AppendixA => "appendixA",
            Family::AppendixBCoverage => "appendixB_coverage",
            Family::ShapleyChain => "shapley_chain",
            Family::Corkscrew => "corkscrew",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("unknown family {0:?}; valid families: {}", Family::ALL.map(|f| f.name()).join(", "))]
    UnknownFamily(String),
    #[error("invalid parameters for {family}: {reason}")]
    InvalidParams { family: Family, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl FromStr for Family {
    type Err = GenerateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| GenerateError::UnknownFamily(s.to_string()))
    }
}

/// Generator parameters. Unset fields fall back to per-family defaults.
#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
pub struct GenParams {
    #[serde(default)]
    pub n: Option<usize>,
    /// Budget override (fixed families have their own defaults).
    #[serde(default, with = "crate::rational::rat_opt")]
    pub budget: Option<Rat>,
    /// ε for the fixed constructions; default 1/100.
    #[serde(default, with = "crate::rational::rat_opt")]
    pub eps: Option<Rat>,
    /// δ for the lower-bound constructions; default 1/100.
    #[serde(default, with = "crate::rational::rat_opt")]
    pub delta: Option<Rat>,
    /// Value of the high-value agent in `additive_lb`; default 1.
    #[serde(default, with = "crate::rational::rat_opt")]
    pub d: Option<Rat>,
}

impl GenParams {
    pub fn with_n(n: usize) -> Self {
        GenParams {
            n: Some(n),
            ..Default::default()
        }
    }
}

fn invalid(family: Family, reason: impl Into<String>) -> GenerateError {
    GenerateError::InvalidParams {
        family,
        reason: reason.into(),
    }
}

/// Builds an instance deterministically from (family, params, seed).
pub fn generate(family: Family, params: &GenParams, seed: u64) -> Result<Instance, GenerateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = match family {
        Family::RandomSymmetric => {
            let n = params.n.unwrap_or(6);
            let mut incs: Vec<Rat> = (0..n).map(|_| rand_rat(&mut rng, 12, 6)).collect();
            incs.sort_by(|a, b| b.cmp(a));
            let costs = rand_costs(&mut rng, n);
            let budget = params
                .budget
                .clone()
                .unwrap_or_else(|| rand_budget(&mut rng, &costs));
            Instance::new(budget, costs, Valuation::Symmetric { increments: incs })?
        }
        Family::RandomAdditive => {
            let n = params.n.unwrap_or(6);
            let values: Vec<Rat> = (0..n).map(|_| rand_rat(&mut rng, 12, 6)).collect();
            let costs = rand_costs(&mut rng, n);
            let budget = params
                .budget
                .clone()
                .unwrap_or_else(|| rand_budget(&mut rng, &costs));
            Instance::new(budget, costs, Valuation::Additive { values })?
        }
        Family::RandomCoverage => {
            let n = params.n.unwrap_or(6);
            let ground_size = n + rng.gen_range(2..=6);
            let sets: Vec<BTreeSet<usize>> = (0..n)
                .map(|_| {
                    let size = rng.gen_range(1..=ground_size.min(5));
                    let mut set = BTreeSet::new();
                    while set.len() < size {
                        set.insert(rng.gen_range(0..ground_size));
                    }
                    set
                })
                .collect();
            let costs = rand_costs(&mut rng, n);
            let budget = params
                .budget
                .clone()
                .unwrap_or_else(|| rand_budget(&mut rng, &costs));
            Instance::new(budget, costs, Valuation::Coverage { ground_size, sets })?
        }
        Family::RandomMatching => {
            // Edges form a star forest: each star shares a left center and
            // owns its right leaves. Max matching then takes the best edge
            // per star, which keeps the valuation submodular; denser edge
            // sets can violate submodularity (see the valuation tests).
            // At most four stars, so any matching has at most four edges.
            let n = params.n.unwrap_or(6);
            let star_count = rng.gen_range(2..=4.min(n));
            let left_size = star_count;
            let right_size = n;
            let edges: Vec<Edge> = (0..n)
                .map(|i| Edge {
                    left: rng.gen_range(0..star_count),
                    right: i,
                    weight: rand_rat(&mut rng, 12, 6),
                })
                .collect();
            let costs = rand_costs(&mut rng, n);
            let budget = params
                .budget
                .clone()
                .unwrap_or_else(|| rand_budget(&mut rng, &costs));
            Instance::new(
                budget,
                costs,
                Valuation::Matching {
                    left_size,
                    right_size,
                    edges,
                },
            )?
        }
        Family::SymmetricLb => {
            // Value |S|; one cheap agent at δ, everyone else at B - δ. The
            // optimum affords exactly two agents while any mechanism that
            // must keep the cheap agent has to hand her almost everything.
            let n = params.n.unwrap_or(4);
            let budget = params.budget.clone().unwrap_or_else(|| rint(1));
            let delta = params.delta.clone().unwrap_or_else(|| rat(1, 100));
            if delta <= Rat::zero() || delta >= budget {
                return Err(invalid(family, "need 0 < delta < budget"));
            }
            if n < 2 {
                return Err(invalid(family, "need n >= 2"));
            }
            let mut costs = vec![&budget - &delta; n];
            costs[0] = delta;
            Instance::new(
                budget,
                costs,
                Valuation::Symmetric {
                    increments: vec![rint(1); n],
                },
            )?
        }
        Family::AdditiveLb => {
            // One agent worth d at tiny cost δ; the rest jointly worth d at
            // total cost B - δ. The optimum buys everything for 2d.
            let n = params.n.unwrap_or(4);
            let budget = params.budget.clone().unwrap_or_else(|| rint(1));
            let delta = params.delta.clone().unwrap_or_else(|| rat(1, 100));
            let d = params.d.clone().unwrap_or_else(|| rint(1));
            if delta <= Rat::zero() || delta >= budget {
                return Err(invalid(family, "need 0 < delta < budget"));
            }
            if d <= Rat::zero() {
                return Err(invalid(family, "need d > 0"));
            }
            if n < 2 {
                return Err(invalid(family, "need n >= 2"));
            }
            let rest = rint(n as i64 - 1);
            let mut values = vec![&d / &rest; n];
            let mut costs = vec![(&budget - &delta) / &rest; n];
            values[0] = d;
            costs[0] = delta;
            Instance::new(budget, costs, Valuation::Additive { values })?
        }
        Family::AppendixA => {
            let eps = params.eps.clone().unwrap_or_else(|| rat(1, 100));
            if eps <= Rat::zero() || eps >= rint(2) {
                return Err(invalid(family, "need 0 < eps < 2"));
            }
            let costs = vec![rint(3), rint(5) - &eps, rint(5)];
            Instance::new(
                params.budget.clone().unwrap_or_else(|| rint(10)),
                costs,
                Valuation::Symmetric {
                    increments: vec![rint(1), rint(1), rint(1)],
                },
            )?
        }
        Family::AppendixBCoverage => {
            // Ground 0..15 split W(7), X(2), Y(2), Z(4); sets W, X∪Y, X∪Z.
            let eps = params.eps.clone().unwrap_or_else(|| rat(1, 100));
            if eps <= Rat::zero() || eps >= rat(7, 24) {
                return Err(invalid(family, "need 0 < eps < 7/24"));
            }
            let w: BTreeSet<usize> = (0..7).collect();
            let xy: BTreeSet<usize> = (7..11).collect();
            let xz: BTreeSet<usize> = (7..9).chain(11..15).collect();
            Instance::new(
                params.budget.clone().unwrap_or_else(|| rint(1)),
                vec![eps, rat(7, 24), rat(1, 2)],
                Valuation::Coverage {
                    ground_size: 15,
                    sets: vec![w, xy, xz],
                },
            )?
        }
        Family::ShapleyChain => {
            // Two-element sets chained through hub elements u0/u1: the first
            // set covers both hubs, set i covers {u_(i mod 2), u_i}. Costs
            // sit just below one so everything is affordable at B = n.
            let n = params.n.unwrap_or(16);
            if n < 2 {
                return Err(invalid(family, "need n >= 2"));
            }
            let ground_size = n + 1;
            let mut sets: Vec<BTreeSet<usize>> = Vec::with_capacity(n);
            sets.push([0usize, 1].into_iter().collect());
            for i in 2..=n {
                let hub = i % 2;
                sets.push([hub, i].into_iter().collect());
            }
            let denom = rint(1000) * rint(ground_size as i64);
            let costs: Vec<Rat> = (1..=n)
                .map(|i| {
                    let eps_i = rint((n as i64) + 1 - (i as i64)) / &denom;
                    rint(1) - eps_i
                })
                .collect();
            Instance::new(
                params.budget.clone().unwrap_or_else(|| rint(n as i64)),
                costs,
                Valuation::Coverage { ground_size, sets },
            )?
        }
        Family::Corkscrew => {
            // One essential agent; the rest are worthless without her.
            let n = params.n.unwrap_or(6);
            if n < 2 {
                return Err(invalid(family, "need n >= 2"));
            }
            let budget = params.budget.clone().unwrap_or_else(|| rint(1));
            let cost = &budget / rint(4 * n as i64);
            Instance::new(
                budget,
                vec![cost; n],
                Valuation::Corkscrew {
                    essential: 0,
                    unit: rint(1),
                },
            )?
        }
    };
    Ok(inst)
}

/// Positive rational with numerator in 1..=max_num and denominator in
/// 1..=max_den.
fn rand_rat(rng: &mut ChaCha8Rng, max_num: i64, max_den: i64) -> Rat {
    rat(rng.gen_range(1..=max_num), rng.gen_range(1..=max_den))
}

fn rand_costs(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rat> {
    (0..n).map(|_| rand_rat(rng, 12, 6)).collect()
}

/// Budget between a quarter of the total cost and slightly above it, so
/// allocations are neither empty nor trivially everything.
fn rand_budget(rng: &mut ChaCha8Rng, costs: &[Rat]) -> Rat {
    let total: Rat = costs.iter().fold(Rat::zero(), |a, c| a + c);
    let scale = rat(rng.gen_range(2..=9), 8);
    let b = total * scale;
    if b <= Rat::zero() {
        rint(1)
    } else {
        b
    }
}

/// Convenience wrapper asserting valid params for library-internal callers.
pub fn must_generate(family: Family, params: &GenParams, seed: u64) -> Instance {
    generate(family, params, seed).unwrap_or_else(|e| panic!("{family} generation failed: {e}"))
}

#[allow(unused)]
fn _big(v: usize) -> BigInt {
    BigInt::from(v)
}

#[allow(unused)]
fn _fmt(r: &Rat) -> String {
    format_rat(r)
}
