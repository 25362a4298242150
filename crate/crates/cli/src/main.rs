//! Command-line front end: generate instances, run mechanisms on instance
//! files, and run audit suites that verify mechanism properties against
//! brute-force optima.
//!
//! Exit codes: 0 success, 1 audit failure, 2 usage error, 3 input mismatch.

mod suite;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bfmech::mechanisms::{MechOutcome, MechanismError, MechanismId};
use bfmech::model::generate::{generate, Family, GenParams};
use bfmech::rational::{format_rat, parse_rat, rint, Rat};
use bfmech::{Instance, Outcome};

#[derive(Parser)]
#[command(name = "bfmech", version, about = "Budget-feasible procurement mechanisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file from a named family.
    Generate(GenerateArgs),
    /// Run a mechanism on an instance file.
    Run(RunArgs),
    /// Run an audit suite from a config file (or the built-in default).
    Audit(AuditArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Family name (one of the generator families).
    #[arg(long)]
    family: String,
    /// Number of agents, where the family takes one.
    #[arg(long)]
    n: Option<usize>,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Epsilon parameter as p/q.
    #[arg(long)]
    eps: Option<String>,
    /// Delta parameter as p/q.
    #[arg(long)]
    delta: Option<String>,
    /// Budget override as p/q.
    #[arg(long)]
    budget: Option<String>,
    /// High-agent value for additive_lb as p/q.
    #[arg(long)]
    d: Option<String>,
    /// Output path for the instance JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Mechanism name.
    #[arg(long)]
    mech: String,
    /// Instance file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Optional output path for the outcome JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sample one branch of a randomized outcome instead of printing the
    /// full distribution.
    #[arg(long)]
    sample: bool,
    /// Seed for --sample.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct AuditArgs {
    /// Suite config JSON; omit to run the built-in default suite.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV summary output path.
    #[arg(long, default_value = "audit.csv")]
    out_csv: PathBuf,
    /// JSON report output path.
    #[arg(long, default_value = "audit.json")]
    out_json: PathBuf,
}

const EXIT_AUDIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Run(args) => cmd_run(args),
        Command::Audit(args) => suite::cmd_audit(args.config, args.out_csv, args.out_json),
    }
}

fn parse_rat_arg(name: &str, value: Option<&str>) -> Result<Option<Rat>, ExitCode> {
    match value {
        None => Ok(None),
        Some(s) => match parse_rat(s) {
            Ok(r) => Ok(Some(r)),
            Err(e) => {
                eprintln!("invalid --{name}: {e}");
                Err(ExitCode::from(EXIT_USAGE))
            }
        },
    }
}

fn cmd_generate(args: GenerateArgs) -> ExitCode {
    let family: Family = match args.family.parse() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let mut params = GenParams::default();
    params.n = args.n;
    params.eps = match parse_rat_arg("eps", args.eps.as_deref()) {
        Ok(v) => v,
        Err(code) => return code,
    };
    params.delta = match parse_rat_arg("delta", args.delta.as_deref()) {
        Ok(v) => v,
        Err(code) => return code,
    };
    params.budget = match parse_rat_arg("budget", args.budget.as_deref()) {
        Ok(v) => v,
        Err(code) => return code,
    };
    params.d = match parse_rat_arg("d", args.d.as_deref()) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let inst = match generate(family, &params, args.seed) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Err(e) = std::fs::write(&args.out, inst.to_json() + "\n") {
        eprintln!("cannot write {}: {e}", args.out.display());
        return ExitCode::from(EXIT_USAGE);
    }
    println!(
        "wrote {} ({} agents, budget {}, {} valuation)",
        args.out.display(),
        inst.n,
        format_rat(&inst.budget),
        inst.valuation.kind()
    );
    ExitCode::SUCCESS
}

fn print_outcome(inst: &Instance, out: &Outcome, label: &str) {
    let winners: Vec<String> = out.winners.iter().map(|w| w.to_string()).collect();
    let payments: Vec<String> = out.payments.iter().map(format_rat).collect();
    println!(
        "{label}winners {{{}}} payments [{}] value {} total_paid {} budget {}",
        winners.join(", "),
        payments.join(", "),
        format_rat(&out.value(inst)),
        format_rat(&out.total_payment()),
        format_rat(&inst.budget)
    );
}

fn cmd_run(args: RunArgs) -> ExitCode {
    let mech: MechanismId = match args.mech.parse() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let inst = match Instance::load(&args.input) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("cannot load {}: {e}", args.input.display());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let outcome = match mech.run(&inst) {
        Ok(o) => o,
        Err(MechanismError::WrongFamily {
            mechanism,
            expected,
            got,
        }) => {
            eprintln!("{mechanism} requires a {expected} valuation, got {got}");
            return ExitCode::from(EXIT_MISMATCH);
        }
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };

    let json = match &outcome {
        MechOutcome::Det(out) => {
            print_outcome(&inst, out, "");
            serde_json::to_string_pretty(out).expect("outcome serializes")
        }
        MechOutcome::Rand(rand) => {
            if args.sample {
                let sampled = sample_branch(rand, args.seed);
                println!("sampled branch (seed {}):", args.seed);
                print_outcome(&inst, sampled, "  ");
                serde_json::to_string_pretty(sampled).expect("outcome serializes")
            } else {
                for branch in &rand.branches {
                    print_outcome(
                        &inst,
                        &branch.outcome,
                        &format!("p={} ", format_rat(&branch.prob)),
                    );
                }
                println!("expected value {}", format_rat(&rand.expected_value(&inst)));
                serde_json::to_string_pretty(rand).expect("outcome serializes")
            }
        }
    };
    if let Some(path) = &args.out {
        if let Err(e) = std::fs::write(path, json + "\n") {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_USAGE);
        }
    }
    ExitCode::SUCCESS
}

/// Reproducible branch selection: a 64-bit draw compared against the
/// cumulative branch probabilities.
fn sample_branch(rand: &bfmech::RandomizedOutcome, seed: u64) -> &Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = Rat::new(rng.gen_range(0..u64::MAX).into(), u64::MAX.into());
    let mut cumulative = rint(0);
    for branch in &rand.branches {
        cumulative += &branch.prob;
        if draw < cumulative {
            return &branch.outcome;
        }
    }
    &rand.branches.last().expect("nonempty distribution").outcome
}
