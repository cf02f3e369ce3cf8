//! Exercises the C ABI from Rust: handle lifecycles, status codes, error
//! messages and JSON payloads.

use std::ffi::{CStr, CString};
use std::ptr;

use surplex_capi::*;

const E2: &str = r#"{
    "states": ["w1", "w2"],
    "types": [
        {"id": "s1", "kind": "strategic", "valuation": "1", "belief": ["3/4", "1/4"]},
        {"id": "s2", "kind": "strategic", "valuation": "2", "belief": ["1/4", "3/4"]},
        {"id": "b", "kind": "behavioral", "valuation": "0", "belief": ["9/10", "1/10"]}
    ]
}"#;

fn cstring(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take_string(ptr: *mut std::ffi::c_char) -> String {
    assert!(!ptr.is_null());
    let s = CStr::from_ptr(ptr).to_str().unwrap().to_owned();
    surplex_string_free(ptr);
    s
}

unsafe fn parse_env(json: &str) -> *mut SurplexEnv {
    let mut env = ptr::null_mut();
    let status = surplex_env_parse(cstring(json).as_ptr(), &mut env);
    assert_eq!(status, SurplexStatus::Ok);
    assert!(!env.is_null());
    env
}

#[test]
fn version_is_a_static_string() {
    let version = surplex_version();
    assert!(!version.is_null());
    let text = unsafe { CStr::from_ptr(version) }.to_str().unwrap();
    assert!(text.starts_with(char::is_numeric));
}

#[test]
fn solve_round_trip_through_the_abi() {
    unsafe {
        let env = parse_env(E2);

        let mut json = ptr::null_mut();
        let status = surplex_solve(env, SurplexMethod::Separation, &mut json);
        assert_eq!(status, SurplexStatus::Ok);
        let payload = take_string(json);
        assert!(payload.contains("\"-2/3\""), "{payload}");

        // the reported contracts verify through the ABI as well
        let parsed: serde_json::Value = serde_json::from_str(&payload).unwrap();
        let menu_json =
            serde_json::json!({ "contracts": parsed["contracts"] }).to_string();
        let mut menu = ptr::null_mut();
        assert_eq!(
            surplex_menu_parse(cstring(&menu_json).as_ptr(), &mut menu),
            SurplexStatus::Ok
        );
        let mut report = ptr::null_mut();
        assert_eq!(surplex_verify(env, menu, &mut report), SurplexStatus::Ok);
        let report = take_string(report);
        assert!(report.contains("\"passed\": true"), "{report}");

        surplex_menu_free(menu);
        surplex_env_free(env);
    }
}

#[test]
fn infeasible_status_still_reports() {
    let in_hull = E2.replace("\"9/10\", \"1/10\"", "\"1/2\", \"1/2\"").replace(
        "\"valuation\": \"0\"",
        "\"valuation\": \"1\"",
    );
    unsafe {
        let env = parse_env(&in_hull);

        let mut json = ptr::null_mut();
        assert_eq!(surplex_check(env, &mut json), SurplexStatus::Infeasible);
        let report = take_string(json);
        assert!(report.contains("\"member\""), "{report}");

        let mut json = ptr::null_mut();
        assert_eq!(
            surplex_solve(env, SurplexMethod::Separation, &mut json),
            SurplexStatus::Infeasible
        );
        let failure = take_string(json);
        assert!(failure.contains("behavioral-in-hull"), "{failure}");

        let mut json = ptr::null_mut();
        assert_eq!(surplex_oracle(env, &mut json), SurplexStatus::Infeasible);
        let oracle = take_string(json);
        assert!(oracle.contains("certificate"), "{oracle}");

        surplex_env_free(env);
    }
}

#[test]
fn value_condition_method_recovers_in_hull_types() {
    let value_ok = E2.replace("\"9/10\", \"1/10\"", "\"1/2\", \"1/2\"").replace(
        "\"valuation\": \"0\"",
        "\"valuation\": \"7/4\"",
    );
    unsafe {
        let env = parse_env(&value_ok);
        let mut json = ptr::null_mut();
        assert_eq!(
            surplex_solve(env, SurplexMethod::ValueCondition, &mut json),
            SurplexStatus::Ok
        );
        let payload = take_string(json);
        assert!(payload.contains("hull-mix"), "{payload}");
        surplex_env_free(env);
    }
}

#[test]
fn parse_errors_set_messages() {
    unsafe {
        let mut env = ptr::null_mut();
        let status = surplex_env_parse(cstring("{\"states\": []}").as_ptr(), &mut env);
        assert_eq!(status, SurplexStatus::InvalidInput);
        assert!(env.is_null());
        let message = CStr::from_ptr(surplex_last_error_message())
            .to_str()
            .unwrap();
        assert!(message.contains("types"), "{message}");

        let status = surplex_env_parse(ptr::null(), &mut env);
        assert_eq!(status, SurplexStatus::NullPointer);

        let status = surplex_env_parse(cstring(E2).as_ptr(), ptr::null_mut());
        assert_eq!(status, SurplexStatus::NullPointer);
    }
}

#[test]
fn environment_json_survives_the_abi() {
    unsafe {
        let env = parse_env(E2);
        let mut json = ptr::null_mut();
        assert_eq!(surplex_env_to_json(env, &mut json), SurplexStatus::Ok);
        let round = take_string(json);
        let again = parse_env(&round);
        let mut json2 = ptr::null_mut();
        assert_eq!(surplex_env_to_json(again, &mut json2), SurplexStatus::Ok);
        assert_eq!(round, take_string(json2));
        surplex_env_free(again);
        surplex_env_free(env);
    }
}

#[test]
fn auction_pipeline_through_the_abi() {
    let auction_json = r#"{
        "bidders": ["1", "2"],
        "grids": {"1": ["1", "2"], "2": ["1", "2"]},
        "prior": [
            {"profile": ["1", "1"], "prob": "1/3"},
            {"profile": ["1", "2"], "prob": "1/6"},
            {"profile": ["2", "1"], "prob": "1/6"},
            {"profile": ["2", "2"], "prob": "1/3"}
        ]
    }"#;
    unsafe {
        let mut auction = ptr::null_mut();
        assert_eq!(
            surplex_auction_parse(cstring(auction_json).as_ptr(), &mut auction),
            SurplexStatus::Ok
        );
        let mut json = ptr::null_mut();
        assert_eq!(surplex_auction_solve(auction, &mut json), SurplexStatus::Ok);
        let payload = take_string(json);
        assert!(payload.contains("\"expected_revenue\": \"5/3\""), "{payload}");
        assert!(payload.contains("\"expected_surplus\": \"5/3\""), "{payload}");
        surplex_auction_free(auction);
    }
}

#[test]
fn generator_emits_parseable_environments() {
    unsafe {
        let mut json = ptr::null_mut();
        let status = surplex_generate(
            9,
            3,
            2,
            1,
            SurplexRegime::Feasible,
            20,
            &mut json,
        );
        assert_eq!(status, SurplexStatus::Ok);
        let payload = take_string(json);
        let env = parse_env(&payload);
        let mut report = ptr::null_mut();
        assert_eq!(surplex_check(env, &mut report), SurplexStatus::Ok);
        surplex_string_free(report);
        surplex_env_free(env);

        // deterministic
        let mut json2 = ptr::null_mut();
        surplex_generate(9, 3, 2, 1, SurplexRegime::Feasible, 20, &mut json2);
        assert_eq!(payload, take_string(json2));

        // unsatisfiable request
        let mut json3 = ptr::null_mut();
        let status = surplex_generate(
            1,
            2,
            3,
            0,
            SurplexRegime::Feasible,
            20,
            &mut json3,
        );
        assert_eq!(status, SurplexStatus::InvalidInput);
    }
}
