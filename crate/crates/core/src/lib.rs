//! Budget-feasible procurement mechanisms over value-query oracles.
//!
//! A buyer with budget `B` faces agents with private costs and a
//! nondecreasing valuation over agent subsets, accessed only through value
//! queries. Mechanisms here allocate a subset and pay each winner so that
//! truthful bidding is dominant, winners are paid at least their cost, and
//! total payments never exceed the budget.
//!
//! The crate has four parts:
//!
//! * [`valuation`] — the supported set-function families behind a counting
//!   value oracle;
//! * [`model`] — instances, outcomes, JSON persistence, and the generator
//!   families (random plus fixed regression constructions);
//! * [`mechanisms`] — the mechanisms themselves, built on a shared
//!   marginal-per-cost greedy and characterized threshold payments;
//! * [`verify`] — independent auditors: brute-force optimum, outcome checks,
//!   bisection-based truthfulness audits, and the anonymity/stability
//!   characterization.
//!
//! All arithmetic is exact rational; nothing in the core samples or rounds.

pub mod mechanisms;
pub mod model;
pub mod rational;
pub mod valuation;
pub mod verify;

pub use model::generate::{generate, Family, GenParams};
pub use model::{Instance, Outcome, RandomizedOutcome};
pub use rational::{parse_rat, rat, rint, Rat};
pub use valuation::{AgentSet, Valuation, ValueOracle};
