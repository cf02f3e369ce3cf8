//! Command-line front end: condition checks, menu construction, menu
//! verification, the brute-force oracle, auction solving and instance
//! generation. Exit codes: 0 success/feasible/verified, 1 infeasible or
//! failed verification (with the certificate printed), 2 malformed input or
//! usage error.

#![allow(clippy::result_large_err)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use surplex::auction::solve_auction;
use surplex::extraction::{full_extraction_menu, value_condition_menu, SolveFailure, SolveResult};
use surplex::generate::{generate, GeneratorSpec, Regime};
use surplex::geometry::{check_extraction_conditions, ConditionCheck, HullResult};
use surplex::io;
use surplex::verify::{oracle_feasibility, verify_menu, OracleOutcome};
use surplex::{Environment, Error, Rational, Weight};

#[derive(Parser)]
#[command(
    name = "surplex",
    version,
    about = "Exact solver for full surplus extraction with always-truthful types"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Require separation for every behavioral belief.
    Theorem,
    /// Allow in-hull behavioral beliefs when their valuations clear the
    /// decomposition threshold.
    Proposition,
}

#[derive(Subcommand)]
enum Command {
    /// Check the feasibility conditions of an environment.
    Check {
        env: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Construct a fully extracting incentive-compatible menu.
    Solve {
        env: PathBuf,
        #[arg(long, value_enum, default_value = "theorem")]
        method: Method,
        #[arg(long)]
        json: bool,
    },
    /// Audit a menu against an environment.
    Verify {
        env: PathBuf,
        menu: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Decide feasibility by the construction-free whole-menu program.
    Oracle {
        env: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Solve a correlated-values auction via per-bidder reductions.
    AuctionSolve {
        auction: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Generate a seeded environment realizing a named regime.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        states: usize,
        #[arg(long)]
        strategic: usize,
        #[arg(long)]
        behavioral: usize,
        /// feasible | strategic-dependent | behavioral-in-hull |
        /// value-feasible | value-infeasible
        #[arg(long)]
        regime: String,
        #[arg(long, default_value_t = 50)]
        denominator_bound: u64,
        /// Write to a file instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

fn load_env(path: &Path) -> Result<Environment, Error> {
    io::environment_from_json(&read_file(path)?)
}

fn rationals(values: &[Rational]) -> String {
    serde_json::to_string(&values.iter().map(Rational::to_string).collect::<Vec<_>>())
        .expect("string vector serializes")
}

fn weights(lambda: &[Weight]) -> String {
    lambda
        .iter()
        .map(|w| format!("{} = {}", w.type_id, w.value))
        .collect::<Vec<_>>()
        .join(", ")
}

fn print_condition_checks(label: &str, checks: &[ConditionCheck], passed: bool) {
    println!("{label}: {}", if passed { "PASS" } else { "FAIL" });
    for check in checks {
        let verdict = match (&check.witness, check.vacuous) {
            (_, true) => "separated (vacuous)".to_string(),
            (HullResult::Separated { z }, _) => format!("separated  z = {}", rationals(z)),
            (HullResult::Member { lambda }, _) => {
                let named: Vec<String> = check
                    .reference_ids
                    .iter()
                    .zip(lambda)
                    .map(|(id, w)| format!("{id} = {w}"))
                    .collect();
                format!("member  lambda: {}", named.join(", "))
            }
        };
        println!("  {}: {}", check.type_id, verdict);
    }
}

fn print_failure(failure: &SolveFailure) {
    match failure {
        SolveFailure::StrategicDependence { type_id, lambda } => {
            println!("strategic belief {type_id:?} decomposes over the other strategic beliefs");
            println!("  lambda: {}", weights(lambda));
        }
        SolveFailure::BehavioralInHull { type_id, lambda } => {
            println!("behavioral belief {type_id:?} lies inside the strategic hull");
            println!("  lambda: {}", weights(lambda));
        }
        SolveFailure::ValuationBelowThreshold {
            type_id,
            valuation,
            threshold,
        } => {
            println!(
                "valuation {valuation} of type {type_id:?} is below its decomposition \
                 threshold {threshold}"
            );
        }
    }
}

fn run(command: Command) -> Result<u8, Error> {
    match command {
        Command::Check { env, json } => {
            let env = load_env(&env)?;
            let report = check_extraction_conditions(&env)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).expect("report"));
            } else {
                print_condition_checks(
                    "strategic independence",
                    &report.strategic_independence,
                    report.strategic_passed,
                );
                print_condition_checks(
                    "behavioral separation",
                    &report.behavioral_separation,
                    report.behavioral_passed,
                );
                println!("overall: {}", if report.passed { "PASS" } else { "FAIL" });
            }
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Solve { env, method, json } => {
            let env = load_env(&env)?;
            let result = match method {
                Method::Theorem => full_extraction_menu(&env)?,
                Method::Proposition => value_condition_menu(&env)?,
            };
            if json {
                let view = io::SolveView::from(&result);
                println!("{}", serde_json::to_string_pretty(&view).expect("view"));
            } else {
                match &result {
                    SolveResult::Menu { menu, derivations } => {
                        println!("status: menu");
                        println!("contracts:");
                        for (id, contract) in menu.iter() {
                            println!("  {}: {}", id, rationals(contract.transfers()));
                        }
                        println!("derivations:");
                        for d in derivations {
                            let mut parts = vec![format!(
                                "{}",
                                serde_json::to_value(d.method)
                                    .expect("method serializes")
                                    .as_str()
                                    .expect("method is a string")
                            )];
                            if let Some(alpha) = &d.alpha {
                                parts.push(format!("alpha = {alpha}"));
                            }
                            if let Some(z) = &d.separator {
                                parts.push(format!("separator = {}", rationals(z)));
                            }
                            if let Some(lambda) = &d.lambda {
                                parts.push(format!("lambda: {}", weights(lambda)));
                            }
                            if let Some(gap) = &d.closed_form_gap {
                                parts.push(format!("closed-form gap = {gap}"));
                            }
                            if let Some(threshold) = &d.value_threshold {
                                parts.push(format!("value threshold = {threshold}"));
                            }
                            println!("  {}: {}", d.type_id, parts.join("  "));
                        }
                    }
                    SolveResult::Failure(failure) => {
                        println!("status: failure");
                        print_failure(failure);
                    }
                }
            }
            Ok(if result.is_menu() { 0 } else { 1 })
        }
        Command::Verify { env, menu, json } => {
            let env = load_env(&env)?;
            let menu = io::menu_from_json(&read_file(&menu)?)?;
            let report = verify_menu(&env, &menu)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).expect("report"));
            } else {
                for v in &report.extraction_violations {
                    println!(
                        "extraction violated for {}: expected {}, got {}",
                        v.type_id, v.required, v.achieved
                    );
                }
                for v in &report.ic_violations {
                    println!(
                        "incentive violated: {} prefers the contract of {} ({} < {})",
                        v.strategic, v.tempting, v.tempting_cost, v.own_cost
                    );
                }
                println!("verified: {}", report.passed);
            }
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Oracle { env, json } => {
            let env = load_env(&env)?;
            let outcome = oracle_feasibility(&env)?;
            let feasible = matches!(outcome, OracleOutcome::Feasible { .. });
            if json {
                let view = match &outcome {
                    OracleOutcome::Feasible { menu } => io::OracleView::Feasible {
                        contracts: menu
                            .iter()
                            .map(|(id, c)| (id.clone(), c.transfers().to_vec()))
                            .collect::<BTreeMap<_, _>>(),
                    },
                    OracleOutcome::Infeasible { certificate } => io::OracleView::Infeasible {
                        certificate: certificate.clone(),
                    },
                };
                println!("{}", serde_json::to_string_pretty(&view).expect("view"));
            } else {
                match &outcome {
                    OracleOutcome::Feasible { menu } => {
                        println!("status: feasible");
                        for (id, contract) in menu.iter() {
                            println!("  {}: {}", id, rationals(contract.transfers()));
                        }
                    }
                    OracleOutcome::Infeasible { certificate } => {
                        println!("status: infeasible");
                        println!("farkas certificate: {}", rationals(certificate));
                    }
                }
            }
            Ok(if feasible { 0 } else { 1 })
        }
        Command::AuctionSolve { auction, json } => {
            let auction = io::auction_from_json(&read_file(&auction)?)?;
            let solution = solve_auction(&auction)?;
            if json {
                let view = io::auction_view(&auction, &solution);
                println!("{}", serde_json::to_string_pretty(&view).expect("view"));
            } else {
                for report in &solution.reports {
                    match &report.outcome {
                        SolveResult::Menu { .. } => {
                            println!("bidder {}: feasible", report.bidder);
                        }
                        SolveResult::Failure(failure) => {
                            println!("bidder {}: infeasible", report.bidder);
                            print_failure(failure);
                        }
                    }
                    if !report.conditions_agree {
                        println!(
                            "  warning: direct and reduced condition checks disagree for \
                             bidder {}",
                            report.bidder
                        );
                    }
                }
                if let Some(rule) = &solution.transfers {
                    println!("transfers:");
                    for (bidder, own, others, transfer) in rule.entries(&auction) {
                        let others: Vec<String> =
                            others.iter().map(Rational::to_string).collect();
                        println!(
                            "  bidder {bidder} reporting {own} vs [{}]: pays {transfer}",
                            others.join(",")
                        );
                    }
                }
                if let Some(audit) = &solution.audit {
                    println!("expected revenue = {}", audit.expected_revenue);
                    println!("expected surplus = {}", audit.expected_surplus);
                }
            }
            Ok(if solution.feasible() { 0 } else { 1 })
        }
        Command::Gen {
            seed,
            states,
            strategic,
            behavioral,
            regime,
            denominator_bound,
            output,
        } => {
            let regime: Regime = regime.parse()?;
            let spec = GeneratorSpec {
                seed,
                num_states: states,
                num_strategic: strategic,
                num_behavioral: behavioral,
                regime,
                denominator_bound,
            };
            let env = generate(&spec)?;
            let json = io::environment_to_json(&env);
            match output {
                Some(path) => std::fs::write(&path, json + "\n")
                    .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))?,
                None => println!("{json}"),
            }
            Ok(0)
        }
    }
}
