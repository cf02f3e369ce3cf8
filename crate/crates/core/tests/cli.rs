//! End-to-end tests of the command-line surface: exit codes, output shapes,
//! and machine-checkability of printed certificates.

mod common;

use std::process::{Command, Output};

use common::{fixture_path, q};
use surplex::geometry::{verify_member, verify_separator};
use surplex::lp::{self, LpOutcome};
use surplex::model::Belief;
use surplex::verify::oracle_problem;
use surplex::Rational;

fn surplex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surplex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_on(fixture: &str, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_surplex"));
    cmd.arg(args[0]).arg(fixture_path(fixture));
    for arg in &args[1..] {
        cmd.arg(arg);
    }
    cmd.output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

#[test]
fn solve_prints_the_expected_contract() {
    let output = run_on("e2.json", &["solve"]);
    assert_eq!(code(&output), 0);
    let text = stdout(&output);
    assert!(text.contains(r#"["-2/3","6"]"#), "{text}");
    assert!(text.contains("status: menu"), "{text}");
}

#[test]
fn solve_json_round_trips_into_verify() {
    let output = run_on("e2.json", &["solve", "--json"]);
    assert_eq!(code(&output), 0);
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(parsed["status"], "menu");

    // feed the printed contracts back through the verifier
    let menu = serde_json::json!({ "contracts": parsed["contracts"] }).to_string();
    let dir = std::env::temp_dir().join("surplex-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let menu_path = dir.join("solved_menu.json");
    std::fs::write(&menu_path, menu).unwrap();

    let verify = surplex(&[
        "verify",
        fixture_path("e2.json").to_str().unwrap(),
        menu_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&verify), 0, "{}", stdout(&verify));
    assert!(stdout(&verify).contains("verified: true"));
}

#[test]
fn verify_flags_a_tampered_menu() {
    let output = surplex(&[
        "verify",
        fixture_path("e2.json").to_str().unwrap(),
        fixture_path("e2_menu_tampered.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&output), 1);
    let text = stdout(&output);
    assert!(text.contains("extraction violated for s1"), "{text}");
    assert!(text.contains("verified: false"), "{text}");
}

#[test]
fn verify_accepts_the_reference_menu() {
    let output = surplex(&[
        "verify",
        fixture_path("e2.json").to_str().unwrap(),
        fixture_path("e2_menu.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&output), 0);
}

#[test]
fn check_reports_in_hull_failure_with_witness() {
    let output = run_on("panel_d.json", &["check"]);
    assert_eq!(code(&output), 1);
    let text = stdout(&output);
    assert!(text.contains("behavioral separation: FAIL"), "{text}");
    assert!(text.contains("member"), "{text}");
    assert!(text.contains("1/3"), "{text}");
}

#[test]
fn check_panel_regimes() {
    // all beliefs convex independent: conditions hold
    assert_eq!(code(&run_on("panel_a.json", &["check"])), 0);
    // behavioral outside the strategic hull even though the pooled set is
    // dependent: conditions hold
    assert_eq!(code(&run_on("panel_b.json", &["check"])), 0);
    let b = run_on("panel_b.json", &["solve"]);
    assert_eq!(code(&b), 0);
    // dependent strategic beliefs
    let c = run_on("panel_c.json", &["check"]);
    assert_eq!(code(&c), 1);
    assert!(stdout(&c).contains("strategic independence: FAIL"));
    // in-hull behavioral
    assert_eq!(code(&run_on("panel_d.json", &["check"])), 1);
}

#[test]
fn check_json_witnesses_reverify() {
    let output = run_on("panel_d.json", &["check", "--json"]);
    assert_eq!(code(&output), 1);
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();

    let env = common::load_fixture_env("panel_d.json");
    for section in ["strategic_independence", "behavioral_separation"] {
        for check in report[section].as_array().unwrap() {
            let type_id = check["type_id"].as_str().unwrap();
            let owner = env.get(type_id).unwrap();
            let refs: Vec<&Belief> = check["reference_ids"]
                .as_array()
                .unwrap()
                .iter()
                .map(|id| &env.get(id.as_str().unwrap()).unwrap().belief)
                .collect();
            let witness = &check["witness"];
            match witness["kind"].as_str().unwrap() {
                "member" => {
                    let lambda: Vec<Rational> = witness["lambda"]
                        .as_array()
                        .unwrap()
                        .iter()
                        .map(|v| q(v.as_str().unwrap()))
                        .collect();
                    assert!(verify_member(&owner.belief, &refs, &lambda));
                }
                "separated" => {
                    let z: Vec<Rational> = witness["z"]
                        .as_array()
                        .unwrap()
                        .iter()
                        .map(|v| q(v.as_str().unwrap()))
                        .collect();
                    assert!(verify_separator(&owner.belief, &refs, &z));
                }
                other => panic!("unexpected witness kind {other}"),
            }
        }
    }
}

#[test]
fn oracle_exit_codes_and_certificate() {
    assert_eq!(code(&run_on("e2.json", &["oracle"])), 0);

    // infeasible: behavioral midpoint with valuation below the threshold
    let dir = std::env::temp_dir().join("surplex-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let env_path = dir.join("midpoint.json");
    std::fs::write(
        &env_path,
        r#"{
          "states": ["w1", "w2"],
          "types": [
            {"id": "s1", "kind": "strategic", "valuation": "1", "belief": ["3/4", "1/4"]},
            {"id": "s2", "kind": "strategic", "valuation": "2", "belief": ["1/4", "3/4"]},
            {"id": "b", "kind": "behavioral", "valuation": "1", "belief": ["1/2", "1/2"]}
          ]
        }"#,
    )
    .unwrap();
    let output = surplex(&["oracle", env_path.to_str().unwrap(), "--json"]);
    assert_eq!(code(&output), 1);
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(report["status"], "infeasible");

    // the printed Farkas vector re-verifies against the oracle program
    let env = surplex::io::environment_from_json(
        &std::fs::read_to_string(&env_path).unwrap(),
    )
    .unwrap();
    let certificate: Vec<Rational> = report["certificate"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| q(v.as_str().unwrap()))
        .collect();
    assert!(lp::check_certificate(
        &oracle_problem(&env),
        &LpOutcome::Infeasible { certificate }
    ));
}

#[test]
fn auction_solve_reports_the_audit() {
    let output = run_on("auction.json", &["auction-solve"]);
    assert_eq!(code(&output), 0);
    let text = stdout(&output);
    assert!(text.contains("expected revenue = 5/3"), "{text}");
    assert!(text.contains("expected surplus = 5/3"), "{text}");

    let behavioral = run_on("auction_b2.json", &["auction-solve", "--json"]);
    assert_eq!(code(&behavioral), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&behavioral)).unwrap();
    assert_eq!(report["feasible"], true);
    assert_eq!(report["audit"]["expected_revenue"], "5/3");
}

#[test]
fn gen_is_deterministic_and_self_consistent() {
    let args = [
        "gen",
        "--seed",
        "11",
        "--states",
        "3",
        "--strategic",
        "2",
        "--behavioral",
        "1",
        "--regime",
        "feasible",
        "--denominator-bound",
        "30",
    ];
    let first = surplex(&args);
    let second = surplex(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(stdout(&first), stdout(&second));

    // the generated file parses and passes its own regime's check
    let dir = std::env::temp_dir().join("surplex-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("generated.json");
    std::fs::write(&path, stdout(&first)).unwrap();
    assert_eq!(code(&surplex(&["check", path.to_str().unwrap()])), 0);
    assert_eq!(code(&surplex(&["solve", path.to_str().unwrap()])), 0);
}

#[test]
fn gen_in_hull_regime_fails_check_but_solves_by_value() {
    let dir = std::env::temp_dir().join("surplex-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("in_hull.json");
    let output = surplex(&[
        "gen",
        "--seed",
        "3",
        "--states",
        "2",
        "--strategic",
        "2",
        "--behavioral",
        "1",
        "--regime",
        "value-feasible",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&output), 0);
    assert_eq!(code(&surplex(&["check", path.to_str().unwrap()])), 1);
    let theorem = surplex(&["solve", path.to_str().unwrap()]);
    assert_eq!(code(&theorem), 1);
    assert!(stdout(&theorem).contains("status: failure"));
    let proposition = surplex(&[
        "solve",
        path.to_str().unwrap(),
        "--method",
        "proposition",
    ]);
    assert_eq!(code(&proposition), 0, "{}", stdout(&proposition));
}

#[test]
fn malformed_inputs_exit_two_with_diagnostics() {
    let dir = std::env::temp_dir().join("surplex-cli-test");
    std::fs::create_dir_all(&dir).unwrap();

    let bad_field = dir.join("bad_field.json");
    std::fs::write(
        &bad_field,
        r#"{"states": ["w1"], "types": [{"id": "t", "kind": "strategic", "valuation": "1", "belief": ["1"], "bogus": 3}]}"#,
    )
    .unwrap();
    let output = surplex(&["check", bad_field.to_str().unwrap()]);
    assert_eq!(code(&output), 2);
    let err = String::from_utf8_lossy(&output.stderr).into_owned();
    assert!(err.contains("bogus"), "{err}");

    let bad_rational = dir.join("bad_rational.json");
    std::fs::write(
        &bad_rational,
        r#"{"states": ["w1"], "types": [{"id": "t", "kind": "strategic", "valuation": "0.5", "belief": ["1"]}]}"#,
    )
    .unwrap();
    let output = surplex(&["check", bad_rational.to_str().unwrap()]);
    assert_eq!(code(&output), 2);
    assert!(String::from_utf8_lossy(&output.stderr).contains("0.5"));

    let missing = surplex(&["check", "/nonexistent/file.json"]);
    assert_eq!(code(&missing), 2);

    // unsatisfiable generator request: usage error class
    let impossible = surplex(&[
        "gen", "--seed", "1", "--states", "2", "--strategic", "3",
        "--behavioral", "0", "--regime", "feasible",
    ]);
    assert_eq!(code(&impossible), 2);

    // clap usage error
    let usage = surplex(&["solve"]);
    assert_eq!(code(&usage), 2);
}

#[test]
fn duplicate_belief_environment_is_rejected_by_name() {
    let dir = std::env::temp_dir().join("surplex-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("dup.json");
    std::fs::write(
        &path,
        r#"{
          "states": ["w1", "w2"],
          "types": [
            {"id": "a", "kind": "strategic", "valuation": "1", "belief": ["1/2", "1/2"]},
            {"id": "b", "kind": "strategic", "valuation": "2", "belief": ["1/2", "1/2"]}
          ]
        }"#,
    )
    .unwrap();
    let output = surplex(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&output), 2);
    assert!(String::from_utf8_lossy(&output.stderr).contains("distinct-beliefs violated"));
}

#[test]
fn independent_prior_auction_is_rejected_before_solving() {
    let dir = std::env::temp_dir().join("surplex-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("independent.json");
    std::fs::write(
        &path,
        r#"{
          "bidders": ["1", "2"],
          "grids": {"1": ["1", "2"], "2": ["1", "2"]},
          "prior": [
            {"profile": ["1", "1"], "prob": "1/10"},
            {"profile": ["1", "2"], "prob": "3/20"},
            {"profile": ["2", "1"], "prob": "3/10"},
            {"profile": ["2", "2"], "prob": "9/20"}
          ]
        }"#,
    )
    .unwrap();
    let output = surplex(&["auction-solve", path.to_str().unwrap()]);
    assert_eq!(code(&output), 2);
    assert!(String::from_utf8_lossy(&output.stderr).contains("distinct-beliefs violated"));
}

#[test]
fn assert_fixture_menu_matches_solver_output() {
    // keep the canned fixture menu in sync with the solver
    let env = common::load_fixture_env("e2.json");
    let result = surplex::extraction::full_extraction_menu(&env).unwrap();
    let expected =
        surplex::io::menu_from_json(&std::fs::read_to_string(fixture_path("e2_menu.json")).unwrap())
            .unwrap();
    assert_eq!(result.menu().unwrap(), &expected);
}
