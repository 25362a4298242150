//! Audit suite runner: a config lists (mechanism, family, params, seeds)
//! runs with pass/fail expectations; each run is audited for outcome
//! soundness, truthfulness, and its approximation ratio against the
//! brute-force optimum. Summary rows go to CSV (sorted by instance digest),
//! full reports to JSON. Exit 0 only when every run meets its expectation,
//! so known-broken regression mechanisms are encoded as expected failures.

use std::path::PathBuf;
use std::process::ExitCode;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use bfmech::mechanisms::MechanismId;
use bfmech::model::generate::{generate, Family, GenParams};
use bfmech::rational::{format_rat, parse_rat, Rat};
use bfmech::verify::{
    approximation_ratio, audit_characterization, audit_outcome, audit_truthfulness, ApxRatio,
    AuditReport, BRUTE_FORCE_MAX_N,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Instance size cap; must respect the brute-force enumeration limit.
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    pub runs: Vec<RunSpec>,
}

fn default_max_n() -> usize {
    12
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSpec {
    pub mechanism: String,
    pub family: String,
    #[serde(default)]
    pub params: GenParams,
    pub seeds: Vec<u64>,
    /// "pass" (default) or "fail" for known-broken regression targets.
    #[serde(default = "default_expect")]
    pub expect: String,
    /// Optional approximation-ratio bound as "p/q".
    #[serde(default)]
    pub ratio_bound: Option<String>,
    /// Audit truthfulness (off for mechanisms with no truthfulness claim).
    #[serde(default = "default_true")]
    pub truthfulness: bool,
    /// Also run the anonymity/stability characterization audit.
    #[serde(default)]
    pub characterization: bool,
}

fn default_expect() -> String {
    "pass".into()
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Serialize)]
struct RunResult {
    digest: String,
    mechanism: String,
    family: String,
    seed: u64,
    n: usize,
    ratio: String,
    checks_passed: usize,
    checks_total: usize,
    expect: String,
    ok: bool,
    reports: Vec<AuditReport>,
}

pub fn cmd_audit(config: Option<PathBuf>, out_csv: PathBuf, out_json: PathBuf) -> ExitCode {
    let config = match config {
        None => default_suite(),
        Some(path) => {
            let text = match std::fs::read_to_string(&path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("cannot read {}: {e}", path.display());
                    return ExitCode::from(super::EXIT_USAGE);
                }
            };
            match serde_json::from_str::<SuiteConfig>(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config parse error in {}: {e}", path.display());
                    return ExitCode::from(super::EXIT_USAGE);
                }
            }
        }
    };
    if config.max_n > BRUTE_FORCE_MAX_N {
        eprintln!(
            "max_n {} exceeds the brute-force limit {}",
            config.max_n, BRUTE_FORCE_MAX_N
        );
        return ExitCode::from(super::EXIT_USAGE);
    }

    // Expand and validate all (run, seed) tasks before any work.
    let mut tasks = Vec::new();
    for run in &config.runs {
        let mech: MechanismId = match run.mechanism.parse() {
            Ok(m) => m,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(super::EXIT_USAGE);
            }
        };
        let family: Family = match run.family.parse() {
            Ok(f) => f,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(super::EXIT_USAGE);
            }
        };
        let bound = match &run.ratio_bound {
            None => None,
            Some(s) => match parse_rat(s) {
                Ok(r) => Some(r),
                Err(e) => {
                    eprintln!("bad ratio_bound {s:?}: {e}");
                    return ExitCode::from(super::EXIT_USAGE);
                }
            },
        };
        for &seed in &run.seeds {
            tasks.push((run.clone(), mech, family, bound.clone(), seed));
        }
    }

    let results: Result<Vec<RunResult>, String> = tasks
        .par_iter()
        .map(|(run, mech, family, bound, seed)| {
            run_one(run, *mech, *family, bound.as_ref(), *seed, config.max_n)
        })
        .collect();
    let mut results = match results {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(super::EXIT_MISMATCH);
        }
    };
    results.sort_by(|a, b| a.digest.cmp(&b.digest));

    if let Err(e) = write_csv(&out_csv, &results) {
        eprintln!("cannot write {}: {e}", out_csv.display());
        return ExitCode::from(super::EXIT_USAGE);
    }
    let json = serde_json::to_string_pretty(&results).expect("results serialize");
    if let Err(e) = std::fs::write(&out_json, json + "\n") {
        eprintln!("cannot write {}: {e}", out_json.display());
        return ExitCode::from(super::EXIT_USAGE);
    }

    let bad: Vec<&RunResult> = results.iter().filter(|r| !r.ok).collect();
    println!(
        "{} runs, {} meeting expectations; reports in {} and {}",
        results.len(),
        results.len() - bad.len(),
        out_csv.display(),
        out_json.display()
    );
    for r in &bad {
        println!(
            "  UNEXPECTED {}: {} on {} seed {} ({} of {} checks passed)",
            if r.expect == "pass" { "FAIL" } else { "PASS" },
            r.mechanism,
            r.family,
            r.seed,
            r.checks_passed,
            r.checks_total
        );
    }
    if bad.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(super::EXIT_AUDIT_FAILURE)
    }
}

fn run_one(
    run: &RunSpec,
    mech: MechanismId,
    family: Family,
    bound: Option<&Rat>,
    seed: u64,
    max_n: usize,
) -> Result<RunResult, String> {
    let inst = generate(family, &run.params, seed)
        .map_err(|e| format!("{}: generation failed: {e}", run.family))?;
    if inst.n > max_n {
        return Err(format!(
            "{} seed {seed}: instance size {} exceeds cap {max_n}",
            run.family, inst.n
        ));
    }
    let outcome = mech
        .run(&inst)
        .map_err(|e| format!("{} on {} seed {seed}: {e}", run.mechanism, run.family))?;

    let mut reports = vec![audit_outcome(&inst, mech.name(), &outcome)];
    if run.truthfulness {
        reports.push(
            audit_truthfulness(mech, &inst)
                .map_err(|e| format!("{} truthfulness audit: {e}", run.mechanism))?,
        );
    }
    if run.characterization && !mech.is_randomized() {
        reports.push(
            audit_characterization(mech, &inst)
                .map_err(|e| format!("{} characterization audit: {e}", run.mechanism))?,
        );
    }

    let value = outcome.expected_value(&inst);
    let ratio = approximation_ratio(&inst, &value)
        .map_err(|e| format!("ratio on {} seed {seed}: {e}", run.family))?;
    let mut ratio_ok = true;
    if let Some(b) = bound {
        ratio_ok = ratio.at_most(b);
    }

    let mut checks_total = 1; // the ratio bound itself counts as one check
    let mut checks_passed = usize::from(ratio_ok);
    for r in &reports {
        checks_total += r.checks.len();
        checks_passed += r.passed_count();
    }
    let all_passed = ratio_ok && reports.iter().all(|r| r.passed());
    let ok = all_passed == (run.expect == "pass");

    Ok(RunResult {
        digest: inst.digest(),
        mechanism: run.mechanism.clone(),
        family: run.family.clone(),
        seed,
        n: inst.n,
        ratio: match &ratio {
            ApxRatio::Finite(r) => format_rat(r),
            ApxRatio::Unbounded => "inf".into(),
        },
        checks_passed,
        checks_total,
        expect: run.expect.clone(),
        ok,
        reports,
    })
}

fn write_csv(path: &PathBuf, results: &[RunResult]) -> Result<(), Box<dyn std::error::Error>> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "mechanism",
        "family",
        "seed",
        "n",
        "ratio_num",
        "ratio_den",
        "checks_passed",
    ])?;
    for r in results {
        let (num, den) = match r.ratio.as_str() {
            "inf" => ("inf".to_string(), "1".to_string()),
            s => match s.split_once('/') {
                Some((n, d)) => (n.to_string(), d.to_string()),
                None => (s.to_string(), "1".to_string()),
            },
        };
        writer.write_record([
            r.mechanism.as_str(),
            r.family.as_str(),
            &r.seed.to_string(),
            &r.n.to_string(),
            &num,
            &den,
            &r.checks_passed.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// The built-in suite: every shipped truthful mechanism over its families
/// with ratio bounds, plus the two known-broken regression targets encoded
/// as expected failures.
fn default_suite() -> SuiteConfig {
    let seeds: Vec<u64> = (1..=12).collect();
    let sub_seeds: Vec<u64> = (1..=6).collect();
    let n = |k: usize| -> GenParams { GenParams::with_n(k) };
    SuiteConfig {
        max_n: 12,
        runs: vec![
            RunSpec {
                mechanism: "symmetric".into(),
                family: "random_symmetric".into(),
                params: n(8),
                seeds: seeds.clone(),
                expect: "pass".into(),
                ratio_bound: Some("2".into()),
                truthfulness: true,
                characterization: true,
            },
            RunSpec {
                mechanism: "symmetric".into(),
                family: "symmetric_lb".into(),
                params: n(6),
                seeds: vec![0],
                expect: "pass".into(),
                ratio_bound: Some("2".into()),
                truthfulness: true,
                characterization: true,
            },
            RunSpec {
                mechanism: "knapsack".into(),
                family: "random_additive".into(),
                params: n(8),
                seeds: seeds.clone(),
                expect: "pass".into(),
                ratio_bound: Some("6".into()),
                truthfulness: true,
                characterization: false,
            },
            RunSpec {
                mechanism: "knapsack".into(),
                family: "additive_lb".into(),
                params: n(6),
                seeds: vec![0],
                expect: "pass".into(),
                ratio_bound: Some("6".into()),
                truthfulness: true,
                characterization: false,
            },
            RunSpec {
                mechanism: "matching".into(),
                family: "random_matching".into(),
                params: n(8),
                seeds: seeds.clone(),
                expect: "pass".into(),
                ratio_bound: Some("6165/1000".into()),
                truthfulness: true,
                characterization: false,
            },
            RunSpec {
                mechanism: "submodular".into(),
                family: "random_symmetric".into(),
                params: n(6),
                seeds: sub_seeds.clone(),
                expect: "pass".into(),
                ratio_bound: Some("112".into()),
                truthfulness: true,
                characterization: false,
            },
            RunSpec {
                mechanism: "submodular".into(),
                family: "random_additive".into(),
                params: n(6),
                seeds: sub_seeds.clone(),
                expect: "pass".into(),
                ratio_bound: Some("112".into()),
                truthfulness: true,
                characterization: false,
            },
            RunSpec {
                mechanism: "submodular".into(),
                family: "random_coverage".into(),
                params: n(6),
                seeds: sub_seeds.clone(),
                expect: "pass".into(),
                ratio_bound: Some("112".into()),
                truthfulness: true,
                characterization: false,
            },
            RunSpec {
                mechanism: "submodular".into(),
                family: "random_matching".into(),
                params: n(6),
                seeds: sub_seeds,
                expect: "pass".into(),
                ratio_bound: Some("112".into()),
                truthfulness: true,
                characterization: false,
            },
            // Known-broken regression targets: the suite passes only while
            // these keep failing their audits.
            RunSpec {
                mechanism: "naive_max".into(),
                family: "appendixB_coverage".into(),
                params: GenParams::default(),
                seeds: vec![0],
                expect: "fail".into(),
                ratio_bound: None,
                truthfulness: true,
                characterization: false,
            },
            RunSpec {
                mechanism: "symmetric_bk".into(),
                family: "random_symmetric".into(),
                params: n(8),
                // Seeds verified to sit off the payment knife edge.
                seeds: vec![2, 3, 5],
                expect: "fail".into(),
                ratio_bound: Some("2".into()),
                truthfulness: true,
                characterization: false,
            },
        ],
    }
}
