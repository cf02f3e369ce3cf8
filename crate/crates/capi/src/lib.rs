//! C ABI for the surplex solver.
//!
//! Conventions:
//! - Opaque handles (`SurplexEnv`, `SurplexMenu`, `SurplexAuction`) are
//!   created by the `_parse` functions and released by the matching `_free`.
//! - Every operation returns a [`SurplexStatus`]. `Ok` and `Infeasible` both
//!   produce a JSON report through the `out_json` parameter (release it with
//!   [`surplex_string_free`]); other codes leave outputs untouched and store
//!   a message retrievable via [`surplex_last_error_message`].
//! - JSON payloads use the same schemas as the `surplex` CLI, with every
//!   rational encoded as an exact string.
//! - All functions are panic-safe: a caught panic reports
//!   `SurplexStatus::Panic` instead of unwinding across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use surplex::auction::solve_auction;
use surplex::extraction::{full_extraction_menu, value_condition_menu};
use surplex::generate::{generate, GeneratorSpec, Regime};
use surplex::geometry::check_extraction_conditions;
use surplex::io;
use surplex::verify::{oracle_feasibility, verify_menu, OracleOutcome};
use surplex::{ContractMenu, Environment};

/// Status code of every C-API call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SurplexStatus {
    /// Success; for solver calls this means feasible/verified.
    Ok = 0,
    /// The operation ran but the answer is negative: conditions violated,
    /// no menu exists, or the menu failed verification. A JSON report with
    /// the certificate is still produced.
    Infeasible = 1,
    /// Malformed input (parse or validation failure).
    InvalidInput = 2,
    /// A required pointer argument was null.
    NullPointer = 3,
    /// Internal panic; a bug. Details via `surplex_last_error_message`.
    Panic = 4,
}

/// Menu-construction method.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SurplexMethod {
    /// Require a separating functional for every behavioral belief
    /// (the CLI's `--method theorem`).
    Separation = 0,
    /// Allow in-hull behavioral beliefs when their valuations clear the
    /// decomposition threshold (the CLI's `--method proposition`).
    ValueCondition = 1,
}

/// Instance-generator regime.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SurplexRegime {
    Feasible = 0,
    StrategicDependent = 1,
    BehavioralInHull = 2,
    ValueFeasible = 3,
    ValueInfeasible = 4,
}

/// Opaque validated environment handle.
pub struct SurplexEnv(Environment);

/// Opaque contract-menu handle.
pub struct SurplexMenu(ContractMenu);

/// Opaque auction handle.
pub struct SurplexAuction(surplex::auction::AuctionEnvironment);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(CString::new(sanitized).expect("NULs removed"));
    });
}

fn guarded<F: FnOnce() -> SurplexStatus>(f: F) -> SurplexStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("internal panic: {message}"));
            SurplexStatus::Panic
        }
    }
}

/// # Safety
/// `input` must be a valid NUL-terminated string pointer.
unsafe fn read_utf8<'a>(input: *const c_char) -> Result<&'a str, SurplexStatus> {
    if input.is_null() {
        set_error("null input pointer".into());
        return Err(SurplexStatus::NullPointer);
    }
    CStr::from_ptr(input).to_str().map_err(|e| {
        set_error(format!("input is not valid UTF-8: {e}"));
        SurplexStatus::InvalidInput
    })
}

fn write_string(out: *mut *mut c_char, value: String) -> SurplexStatus {
    if out.is_null() {
        set_error("null output pointer".into());
        return SurplexStatus::NullPointer;
    }
    let sanitized = value.replace('\0', " ");
    let c = CString::new(sanitized).expect("NULs removed");
    unsafe { *out = c.into_raw() };
    SurplexStatus::Ok
}

fn write_report(out: *mut *mut c_char, value: String, positive: bool) -> SurplexStatus {
    match write_string(out, value) {
        SurplexStatus::Ok => {
            if positive {
                SurplexStatus::Ok
            } else {
                SurplexStatus::Infeasible
            }
        }
        other => other,
    }
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn surplex_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Message for the most recent failing call on this thread, or null. Owned
/// by the library; valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn surplex_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(ptr::null())
    })
}

/// Releases a string returned through an `out_json` parameter.
///
/// # Safety
/// `s` must be a pointer previously returned by this library (or null).
#[no_mangle]
pub unsafe extern "C" fn surplex_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates an environment from JSON.
///
/// # Safety
/// `json` must be NUL-terminated; `out_env` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn surplex_env_parse(
    json: *const c_char,
    out_env: *mut *mut SurplexEnv,
) -> SurplexStatus {
    guarded(|| {
        if out_env.is_null() {
            set_error("null output pointer".into());
            return SurplexStatus::NullPointer;
        }
        let text = match read_utf8(json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match io::environment_from_json(text) {
            Ok(env) => {
                *out_env = Box::into_raw(Box::new(SurplexEnv(env)));
                SurplexStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                SurplexStatus::InvalidInput
            }
        }
    })
}

/// # Safety
/// `env` must come from `surplex_env_parse` (or be null).
#[no_mangle]
pub unsafe extern "C" fn surplex_env_free(env: *mut SurplexEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Serializes an environment back to JSON.
///
/// # Safety
/// `env` must be a live handle; `out_json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn surplex_env_to_json(
    env: *const SurplexEnv,
    out_json: *mut *mut c_char,
) -> SurplexStatus {
    guarded(|| {
        let Some(env) = env.as_ref() else {
            set_error("null environment handle".into());
            return SurplexStatus::NullPointer;
        };
        write_string(out_json, io::environment_to_json(&env.0))
    })
}

/// Parses a contract menu from JSON.
///
/// # Safety
/// `json` must be NUL-terminated; `out_menu` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn surplex_menu_parse(
    json: *const c_char,
    out_menu: *mut *mut SurplexMenu,
) -> SurplexStatus {
    guarded(|| {
        if out_menu.is_null() {
            set_error("null output pointer".into());
            return SurplexStatus::NullPointer;
        }
        let text = match read_utf8(json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match io::menu_from_json(text) {
            Ok(menu) => {
                *out_menu = Box::into_raw(Box::new(SurplexMenu(menu)));
                SurplexStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                SurplexStatus::InvalidInput
            }
        }
    })
}

/// # Safety
/// `menu` must come from `surplex_menu_parse` (or be null).
#[no_mangle]
pub unsafe extern "C" fn surplex_menu_free(menu: *mut SurplexMenu) {
    if !menu.is_null() {
        drop(Box::from_raw(menu));
    }
}

/// Parses and validates an auction from JSON.
///
/// # Safety
/// `json` must be NUL-terminated; `out_auction` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn surplex_auction_parse(
    json: *const c_char,
    out_auction: *mut *mut SurplexAuction,
) -> SurplexStatus {
    guarded(|| {
        if out_auction.is_null() {
            set_error("null output pointer".into());
            return SurplexStatus::NullPointer;
        }
        let text = match read_utf8(json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match io::auction_from_json(text) {
            Ok(auction) => {
                *out_auction = Box::into_raw(Box::new(SurplexAuction(auction)));
                SurplexStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                SurplexStatus::InvalidInput
            }
        }
    })
}

/// # Safety
/// `auction` must come from `surplex_auction_parse` (or be null).
#[no_mangle]
pub unsafe extern "C" fn surplex_auction_free(auction: *mut SurplexAuction) {
    if !auction.is_null() {
        drop(Box::from_raw(auction));
    }
}

/// Evaluates the feasibility conditions; `Ok` when both hold, `Infeasible`
/// otherwise, with the full JSON report (witnesses included) either way.
///
/// # Safety
/// `env` must be a live handle; `out_json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn surplex_check(
    env: *const SurplexEnv,
    out_json: *mut *mut c_char,
) -> SurplexStatus {
    guarded(|| {
        let Some(env) = env.as_ref() else {
            set_error("null environment handle".into());
            return SurplexStatus::NullPointer;
        };
        match check_extraction_conditions(&env.0) {
            Ok(report) => {
                let json =
                    serde_json::to_string_pretty(&report).expect("report serializes");
                write_report(out_json, json, report.passed)
            }
            Err(e) => {
                set_error(e.to_string());
                SurplexStatus::InvalidInput
            }
        }
    })
}

/// Constructs a fully extracting menu; `Ok` with the menu and derivations on
/// success, `Infeasible` with the failure certificate otherwise.
///
/// # Safety
/// `env` must be a live handle; `out_json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn surplex_solve(
    env: *const SurplexEnv,
    method: SurplexMethod,
    out_json: *mut *mut c_char,
) -> SurplexStatus {
    guarded(|| {
        let Some(env) = env.as_ref() else {
            set_error("null environment handle".into());
            return SurplexStatus::NullPointer;
        };
        let result = match method {
            SurplexMethod::Separation => full_extraction_menu(&env.0),
            SurplexMethod::ValueCondition => value_condition_menu(&env.0),
        };
        match result {
            Ok(result) => {
                let view = io::SolveView::from(&result);
                let json = serde_json::to_string_pretty(&view).expect("view serializes");
                write_report(out_json, json, result.is_menu())
            }
            Err(e) => {
                set_error(e.to_string());
                SurplexStatus::InvalidInput
            }
        }
    })
}

/// Audits a menu: `Ok` when it extracts fully and is incentive compatible,
/// `Infeasible` with the violation report otherwise.
///
/// # Safety
/// `env` and `menu` must be live handles; `out_json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn surplex_verify(
    env: *const SurplexEnv,
    menu: *const SurplexMenu,
    out_json: *mut *mut c_char,
) -> SurplexStatus {
    guarded(|| {
        let (Some(env), Some(menu)) = (env.as_ref(), menu.as_ref()) else {
            set_error("null handle".into());
            return SurplexStatus::NullPointer;
        };
        match verify_menu(&env.0, &menu.0) {
            Ok(report) => {
                let json =
                    serde_json::to_string_pretty(&report).expect("report serializes");
                write_report(out_json, json, report.passed)
            }
            Err(e) => {
                set_error(e.to_string());
                SurplexStatus::InvalidInput
            }
        }
    })
}

/// Construction-free feasibility oracle; `Ok` with a witness menu or
/// `Infeasible` with the Farkas certificate.
///
/// # Safety
/// `env` must be a live handle; `out_json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn surplex_oracle(
    env: *const SurplexEnv,
    out_json: *mut *mut c_char,
) -> SurplexStatus {
    guarded(|| {
        let Some(env) = env.as_ref() else {
            set_error("null environment handle".into());
            return SurplexStatus::NullPointer;
        };
        match oracle_feasibility(&env.0) {
            Ok(outcome) => {
                let feasible = matches!(outcome, OracleOutcome::Feasible { .. });
                let view = match outcome {
                    OracleOutcome::Feasible { menu } => io::OracleView::Feasible {
                        contracts: menu
                            .iter()
                            .map(|(id, c)| (id.clone(), c.transfers().to_vec()))
                            .collect(),
                    },
                    OracleOutcome::Infeasible { certificate } => {
                        io::OracleView::Infeasible { certificate }
                    }
                };
                let json = serde_json::to_string_pretty(&view).expect("view serializes");
                write_report(out_json, json, feasible)
            }
            Err(e) => {
                set_error(e.to_string());
                SurplexStatus::InvalidInput
            }
        }
    })
}

/// Solves the auction through per-bidder reductions; `Ok` with transfers and
/// the revenue audit when every bidder is feasible, `Infeasible` with the
/// per-bidder reports otherwise.
///
/// # Safety
/// `auction` must be a live handle; `out_json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn surplex_auction_solve(
    auction: *const SurplexAuction,
    out_json: *mut *mut c_char,
) -> SurplexStatus {
    guarded(|| {
        let Some(auction) = auction.as_ref() else {
            set_error("null auction handle".into());
            return SurplexStatus::NullPointer;
        };
        match solve_auction(&auction.0) {
            Ok(solution) => {
                let view = io::auction_view(&auction.0, &solution);
                let json = serde_json::to_string_pretty(&view).expect("view serializes");
                write_report(out_json, json, solution.feasible())
            }
            Err(e) => {
                set_error(e.to_string());
                SurplexStatus::InvalidInput
            }
        }
    })
}

/// Generates a seeded environment in the given regime, as environment JSON
/// accepted by `surplex_env_parse`.
///
/// # Safety
/// `out_json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn surplex_generate(
    seed: u64,
    num_states: u32,
    num_strategic: u32,
    num_behavioral: u32,
    regime: SurplexRegime,
    denominator_bound: u64,
    out_json: *mut *mut c_char,
) -> SurplexStatus {
    guarded(|| {
        let spec = GeneratorSpec {
            seed,
            num_states: num_states as usize,
            num_strategic: num_strategic as usize,
            num_behavioral: num_behavioral as usize,
            regime: match regime {
                SurplexRegime::Feasible => Regime::Feasible,
                SurplexRegime::StrategicDependent => Regime::StrategicDependent,
                SurplexRegime::BehavioralInHull => Regime::BehavioralInHull,
                SurplexRegime::ValueFeasible => Regime::ValueFeasible,
                SurplexRegime::ValueInfeasible => Regime::ValueInfeasible,
            },
            denominator_bound,
        };
        match generate(&spec) {
            Ok(env) => write_string(out_json, io::environment_to_json(&env)),
            Err(e) => {
                set_error(e.to_string());
                SurplexStatus::InvalidInput
            }
        }
    })
}
