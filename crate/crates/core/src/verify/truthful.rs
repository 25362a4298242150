//! Outcome audits and the Myerson truthfulness audit: per-agent win
//! monotonicity over a candidate bid set, and threshold payments verified by
//! bisecting the win/lose boundary with exact rational probes.

use std::collections::BTreeSet;

use num::Zero;

use super::{AuditReport, Counterexample, VerifyError};
use crate::mechanisms::{MechOutcome, MechanismId};
use crate::model::{Instance, Outcome};
use crate::rational::{format_rat, pow2_scaled, rint, Rat};

/// Bracket width for threshold bisection: budget * 2^-40.
pub const BISECTION_BITS: u32 = 40;
/// Perturbation around the observed payment in the monotonicity candidates.
const PAYMENT_JITTER_BITS: u32 = 20;
/// Extra evenly-spread bisection probes for the monotonicity scan.
const MONOTONE_PROBES: usize = 64;

/// Checks budget feasibility, individual rationality, normalization and
/// nonnegative payments. Randomized outcomes are audited branch by branch,
/// plus the probability mass itself.
pub fn audit_outcome(inst: &Instance, subject: &str, outcome: &MechOutcome) -> AuditReport {
    let mut report = AuditReport::new(subject, inst.digest());
    match outcome {
        MechOutcome::Det(out) => outcome_checks(inst, out, "", &mut report),
        MechOutcome::Rand(rand) => {
            let mut mass = Rat::zero();
            let mut positive = true;
            for (b, branch) in rand.branches.iter().enumerate() {
                positive &= branch.prob > Rat::zero();
                mass += &branch.prob;
                outcome_checks(inst, &branch.outcome, &format!("branch{b}:"), &mut report);
            }
            report.push(
                "probabilities",
                positive && mass == rint(1),
                format!("total mass {}", format_rat(&mass)),
            );
        }
    }
    report
}

fn outcome_checks(inst: &Instance, out: &Outcome, prefix: &str, report: &mut AuditReport) {
    let structure = out.validate(inst.n);
    report.push(
        format!("{prefix}normalization"),
        structure.is_ok(),
        match &structure {
            Ok(()) => String::new(),
            Err(e) => e.to_string(),
        },
    );

    let total = out.total_payment();
    report.push(
        format!("{prefix}budget_feasible"),
        total <= inst.budget,
        format!(
            "total payment {} vs budget {}",
            format_rat(&total),
            format_rat(&inst.budget)
        ),
    );

    let ir_violation = out
        .winners
        .iter()
        .find(|&&w| out.payments[w] < inst.costs[w]);
    report.push(
        format!("{prefix}individual_rationality"),
        ir_violation.is_none(),
        match ir_violation {
            None => String::new(),
            Some(&w) => format!(
                "agent {w} paid {} below cost {}",
                format_rat(&out.payments[w]),
                format_rat(&inst.costs[w])
            ),
        },
    );

    let negative = out.payments.iter().position(|p| *p < Rat::zero());
    report.push(
        format!("{prefix}no_positive_transfers"),
        negative.is_none(),
        match negative {
            None => String::new(),
            Some(i) => format!("agent {i} paid {}", format_rat(&out.payments[i])),
        },
    );
}

/// Whether `agent` wins under `mech` when bidding `bid`, others fixed.
fn wins(
    mech: MechanismId,
    inst: &Instance,
    agent: usize,
    bid: &Rat,
) -> Result<bool, VerifyError> {
    let winners = mech.allocation(&inst.with_bid(agent, bid.clone()))?;
    Ok(winners.contains(&agent))
}

/// Win/lose boundary of one agent's bid, bisected to width budget * 2^-40.
#[derive(Debug, Clone)]
pub enum ThresholdBracket {
    /// Wins at every probed bid up to and including the budget.
    AlwaysWins,
    /// Bracket [lo, hi]: wins at lo, loses at hi, hi - lo within tolerance.
    Bracket { lo: Rat, hi: Rat },
}

/// Bisects the boundary for a winner at her current bid. Probes are exact
/// rationals; the midpoints visited are returned for reuse as monotonicity
/// candidates.
pub fn bisect_threshold(
    mech: MechanismId,
    inst: &Instance,
    agent: usize,
) -> Result<(ThresholdBracket, Vec<Rat>), VerifyError> {
    bisect_threshold_with(
        |bid| wins(mech, inst, agent, bid),
        &inst.costs[agent],
        &inst.budget,
    )
}

/// Generic bisection over any win predicate; `winning_bid` must win and
/// bids above the budget must lose.
pub fn bisect_threshold_with<F>(
    mut win: F,
    winning_bid: &Rat,
    budget: &Rat,
) -> Result<(ThresholdBracket, Vec<Rat>), VerifyError>
where
    F: FnMut(&Rat) -> Result<bool, VerifyError>,
{
    let mut probes = Vec::new();
    if win(budget)? {
        return Ok((ThresholdBracket::AlwaysWins, probes));
    }
    let mut lo = winning_bid.clone();
    let mut hi = budget.clone();
    let tol = pow2_scaled(budget, BISECTION_BITS);
    while &hi - &lo > tol {
        let mid = (&lo + &hi) / rint(2);
        probes.push(mid.clone());
        if win(&mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((ThresholdBracket::Bracket { lo, hi }, probes))
}

/// Candidate bids for the monotonicity scan, clamped to [0, budget].
fn monotonicity_candidates(inst: &Instance, agent: usize, payment: Option<&Rat>) -> BTreeSet<Rat> {
    let mut bids: BTreeSet<Rat> = BTreeSet::new();
    bids.insert(Rat::zero());
    bids.insert(inst.budget.clone());
    bids.insert(inst.costs[agent].clone());
    for (i, c) in inst.costs.iter().enumerate() {
        if i != agent {
            bids.insert(c.clone());
        }
    }
    for m in 1..=inst.n as i64 {
        bids.insert(&inst.budget / rint(m));
    }
    if let Some(p) = payment {
        let jitter = pow2_scaled(&inst.budget, PAYMENT_JITTER_BITS);
        bids.insert(p.clone());
        bids.insert(p + &jitter);
        if *p >= jitter {
            bids.insert(p - &jitter);
        }
    }
    for k in 1..=MONOTONE_PROBES as i64 {
        bids.insert(&inst.budget * rint(k) / rint(MONOTONE_PROBES as i64 + 1));
    }
    bids.retain(|b| *b >= Rat::zero() && *b <= inst.budget);
    bids
}

/// Myerson audit of a deterministic mechanism, or of every branch of a
/// randomized one: (a) the win indicator is nonincreasing in the agent's own
/// bid over the candidate set; (b) each winner's payment lies in the
/// bisected threshold bracket, with always-winners paid exactly the budget.
pub fn audit_truthfulness(
    mech: MechanismId,
    inst: &Instance,
) -> Result<AuditReport, VerifyError> {
    let mut report = AuditReport::new(mech.name(), inst.digest());
    match mech.branches() {
        Some(branches) => {
            for (b, branch_mech) in branches.into_iter().enumerate() {
                audit_deterministic(branch_mech, inst, &format!("branch{b}:"), &mut report)?;
            }
        }
        None => audit_deterministic(mech, inst, "", &mut report)?,
    }
    Ok(report)
}

fn audit_deterministic(
    mech: MechanismId,
    inst: &Instance,
    prefix: &str,
    report: &mut AuditReport,
) -> Result<(), VerifyError> {
    let truthful = mech.run_det(inst)?;
    let mut monotone_ok = true;
    let mut threshold_ok = true;
    let mut threshold_evidence = String::new();

    for agent in 0..inst.n {
        let is_winner = truthful.winners.contains(&agent);
        let payment = is_winner.then(|| truthful.payments[agent].clone());

        // Threshold first: its probe trail feeds the monotonicity scan.
        let mut extra_probes = Vec::new();
        if let Some(pay) = &payment {
            match bisect_threshold(mech, inst, agent)? {
                (ThresholdBracket::AlwaysWins, _) => {
                    if *pay != inst.budget {
                        threshold_ok = false;
                        threshold_evidence = format!(
                            "agent {agent} wins at every bid but is paid {} instead of the budget",
                            format_rat(pay)
                        );
                        if report.counterexample.is_none() {
                            report.counterexample = Some(Counterexample {
                                agent,
                                bid_low: inst.costs[agent].clone(),
                                bid_high: inst.budget.clone(),
                                violation: threshold_evidence.clone(),
                            });
                        }
                    }
                }
                (ThresholdBracket::Bracket { lo, hi }, probes) => {
                    extra_probes = probes;
                    if !(lo <= *pay && *pay <= hi) {
                        threshold_ok = false;
                        threshold_evidence = format!(
                            "agent {agent} paid {} outside threshold bracket [{}, {}]",
                            format_rat(pay),
                            format_rat(&lo),
                            format_rat(&hi)
                        );
                        if report.counterexample.is_none() {
                            report.counterexample = Some(Counterexample {
                                agent,
                                bid_low: lo.clone(),
                                bid_high: hi.clone(),
                                violation: threshold_evidence.clone(),
                            });
                        }
                    }
                }
            }
        }

        // Monotonicity scan: a losing bid below a winning bid is a violation.
        // Report the widest witness: the highest winning bid against the
        // lowest losing bid beneath it.
        let mut candidates = monotonicity_candidates(inst, agent, payment.as_ref());
        candidates.extend(extra_probes);
        let scanned: Vec<(Rat, bool)> = candidates
            .into_iter()
            .map(|bid| wins(mech, inst, agent, &bid).map(|w| (bid, w)))
            .collect::<Result<_, _>>()?;
        let top_win = scanned.iter().rev().find(|(_, w)| *w).map(|(b, _)| b);
        if let Some(win_bid) = top_win {
            let low_lose = scanned
                .iter()
                .find(|(b, w)| !*w && b < win_bid)
                .map(|(b, _)| b);
            if let Some(lose_bid) = low_lose {
                monotone_ok = false;
                if report.counterexample.is_none() {
                    report.counterexample = Some(Counterexample {
                        agent,
                        bid_low: lose_bid.clone(),
                        bid_high: win_bid.clone(),
                        violation: format!(
                            "agent {agent} loses at bid {} but wins at higher bid {}",
                            format_rat(lose_bid),
                            format_rat(win_bid)
                        ),
                    });
                }
                break;
            }
        }
    }

    report.push(
        format!("{prefix}monotonicity"),
        monotone_ok,
        if monotone_ok {
            String::new()
        } else {
            report
                .counterexample
                .as_ref()
                .map(|c| c.violation.clone())
                .unwrap_or_default()
        },
    );
    report.push(format!("{prefix}threshold_payments"), threshold_ok, threshold_evidence);
    Ok(())
}

/// Grid of deviation bids for one agent: a fine sweep of the budget plus
/// every structurally meaningful point.
pub fn deviation_bid_grid(inst: &Instance, agent: usize) -> Vec<Rat> {
    let mut bids = monotonicity_candidates(inst, agent, None);
    for k in 0..=200i64 {
        bids.insert(&inst.budget * rint(k) / rint(200));
    }
    let steps = [crate::rational::rat(1, 100), crate::rational::rat(1, 50)];
    for (i, c) in inst.costs.iter().enumerate() {
        if i == agent {
            continue;
        }
        for s in &steps {
            if c >= s {
                bids.insert(c - s);
            }
            bids.insert(c + s);
        }
    }
    bids.retain(|b| *b >= Rat::zero() && *b <= inst.budget);
    bids.into_iter().collect()
}

/// Best utility gain agent can extract by misreporting, over the bid grid:
/// max over bids of (payment - cost * win) minus the truthful utility,
/// floored at zero (not deviating is always available).
pub fn best_deviation_gain(
    mech: MechanismId,
    inst: &Instance,
    agent: usize,
) -> Result<Rat, VerifyError> {
    let utility = |out: &Outcome| -> Rat {
        if out.winners.contains(&agent) {
            &out.payments[agent] - &inst.costs[agent]
        } else {
            Rat::zero()
        }
    };
    let truthful = utility(&mech.run_det(inst)?);
    let mut best = Rat::zero();
    for bid in deviation_bid_grid(inst, agent) {
        let out = mech.run_det(&inst.with_bid(agent, bid))?;
        let gain = utility(&out) - &truthful;
        if gain > best {
            best = gain;
        }
    }
    Ok(best)
}
