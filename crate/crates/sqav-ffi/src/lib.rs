//! C ABI over the sqav simulator.
//!
//! The surface mirrors the CLI: each run function takes a JSON scenario
//! string (same schemas as the `configs/` files) and returns an opaque
//! result handle carrying a status code and a JSON report. Handles own
//! their memory; free them with [`sqav_result_free`]. All functions catch
//! panics at the boundary and report them as `SQAV_STATUS_INTERNAL_ERROR`.

use std::ffi::{c_char, c_double, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use sqav::adversary::pass_probability_intercept;
use sqav::cli::{
    run_amc_scenario, run_attack_scenario, run_verify_scenario, run_vote_scenario, AmcScenario,
    AttackScenario, VerifyScenario, VoteScenario,
};

/// Status of a finished call; numbering matches the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SqavStatus {
    Ok = 0,
    /// Bad scenario JSON or parameters outside their legal range.
    InvalidArgument = 2,
    /// The protocol run aborted (failed security test or verification).
    ProtocolAbort = 3,
    /// A verification suite or prediction-agreement check failed.
    VerificationFailed = 4,
    InternalError = 5,
}

/// Opaque run result: a status plus an owned JSON report and, on failure,
/// an error message.
pub struct SqavResult {
    status: SqavStatus,
    json: Option<CString>,
    error: Option<CString>,
}

impl SqavResult {
    fn failure(status: SqavStatus, message: String) -> *mut SqavResult {
        Box::into_raw(Box::new(SqavResult {
            status,
            json: None,
            error: Some(to_cstring(message)),
        }))
    }

    fn report(status: SqavStatus, json: String) -> *mut SqavResult {
        Box::into_raw(Box::new(SqavResult {
            status,
            json: Some(to_cstring(json)),
            error: None,
        }))
    }
}

fn to_cstring(s: String) -> CString {
    CString::new(s.replace('\0', " ")).expect("interior NULs replaced")
}

/// # Safety
/// `config_json` must be a valid NUL-terminated UTF-8 string or NULL.
unsafe fn read_config(config_json: *const c_char) -> Result<String, *mut SqavResult> {
    if config_json.is_null() {
        return Err(SqavResult::failure(
            SqavStatus::InvalidArgument,
            "config pointer is NULL".into(),
        ));
    }
    match CStr::from_ptr(config_json).to_str() {
        Ok(s) => Ok(s.to_owned()),
        Err(_) => Err(SqavResult::failure(
            SqavStatus::InvalidArgument,
            "config is not valid UTF-8".into(),
        )),
    }
}

fn guarded(run: impl FnOnce() -> *mut SqavResult) -> *mut SqavResult {
    match catch_unwind(AssertUnwindSafe(run)) {
        Ok(result) => result,
        Err(_) => SqavResult::failure(SqavStatus::InternalError, "panic inside sqav".into()),
    }
}

/// Run one election scenario (the `vote` command's config schema).
/// On success the result JSON is the full transcript.
///
/// # Safety
/// `config_json` must be a valid NUL-terminated string or NULL; the returned
/// handle must be released with `sqav_result_free`.
#[no_mangle]
pub unsafe extern "C" fn sqav_vote_run(config_json: *const c_char) -> *mut SqavResult {
    let config = match read_config(config_json) {
        Ok(c) => c,
        Err(e) => return e,
    };
    guarded(move || {
        let scenario: VoteScenario = match serde_json::from_str(&config) {
            Ok(s) => s,
            Err(e) => return SqavResult::failure(SqavStatus::InvalidArgument, e.to_string()),
        };
        match run_vote_scenario(&scenario, None) {
            Ok(transcript) => {
                let status = if transcript.completed() {
                    SqavStatus::Ok
                } else {
                    SqavStatus::ProtocolAbort
                };
                match serde_json::to_string(&transcript) {
                    Ok(json) => SqavResult::report(status, json),
                    Err(e) => SqavResult::failure(SqavStatus::InternalError, e.to_string()),
                }
            }
            Err(e) => SqavResult::failure(SqavStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Run one anonymous multi-party computation scenario (the `amc` command's
/// config schema). On success the result JSON matches `amc_result.json`.
///
/// # Safety
/// As for `sqav_vote_run`.
#[no_mangle]
pub unsafe extern "C" fn sqav_amc_run(config_json: *const c_char) -> *mut SqavResult {
    let config = match read_config(config_json) {
        Ok(c) => c,
        Err(e) => return e,
    };
    guarded(move || {
        let scenario: AmcScenario = match serde_json::from_str(&config) {
            Ok(s) => s,
            Err(e) => return SqavResult::failure(SqavStatus::InvalidArgument, e.to_string()),
        };
        match run_amc_scenario(&scenario, None) {
            Ok(result) => {
                let status = if result.verifications.iter().all(|&v| v) {
                    SqavStatus::Ok
                } else {
                    SqavStatus::ProtocolAbort
                };
                match serde_json::to_string(&result) {
                    Ok(json) => SqavResult::report(status, json),
                    Err(e) => SqavResult::failure(SqavStatus::InternalError, e.to_string()),
                }
            }
            Err(e) => SqavResult::failure(SqavStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Run the numerical verification suite (the `verify` command's config
/// schema). Status is `VERIFICATION_FAILED` when any check fails; the
/// result JSON is the full per-check report either way.
///
/// # Safety
/// As for `sqav_vote_run`.
#[no_mangle]
pub unsafe extern "C" fn sqav_verify_run(config_json: *const c_char) -> *mut SqavResult {
    let config = match read_config(config_json) {
        Ok(c) => c,
        Err(e) => return e,
    };
    guarded(move || {
        let scenario: VerifyScenario = match serde_json::from_str(&config) {
            Ok(s) => s,
            Err(e) => return SqavResult::failure(SqavStatus::InvalidArgument, e.to_string()),
        };
        match run_verify_scenario(&scenario, None) {
            Ok(report) => {
                let status = if report.all_pass {
                    SqavStatus::Ok
                } else {
                    SqavStatus::VerificationFailed
                };
                match serde_json::to_string(&report) {
                    Ok(json) => SqavResult::report(status, json),
                    Err(e) => SqavResult::failure(SqavStatus::InternalError, e.to_string()),
                }
            }
            Err(e) => SqavResult::failure(SqavStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Run an attack sweep (the `attack` command's config schema). Status is
/// `VERIFICATION_FAILED` when any measurement disagrees with its prediction;
/// the result JSON carries the sweep rows and the verdict.
///
/// # Safety
/// As for `sqav_vote_run`.
#[no_mangle]
pub unsafe extern "C" fn sqav_attack_run(config_json: *const c_char) -> *mut SqavResult {
    let config = match read_config(config_json) {
        Ok(c) => c,
        Err(e) => return e,
    };
    guarded(move || {
        let scenario: AttackScenario = match serde_json::from_str(&config) {
            Ok(s) => s,
            Err(e) => return SqavResult::failure(SqavStatus::InvalidArgument, e.to_string()),
        };
        match run_attack_scenario(&scenario, None) {
            Ok((rows, agree)) => {
                let status = if agree {
                    SqavStatus::Ok
                } else {
                    SqavStatus::VerificationFailed
                };
                let payload = serde_json::json!({
                    "schema_version": 1,
                    "rows": rows,
                    "agreement": agree,
                });
                match serde_json::to_string(&payload) {
                    Ok(json) => SqavResult::report(status, json),
                    Err(e) => SqavResult::failure(SqavStatus::InternalError, e.to_string()),
                }
            }
            Err(e) => SqavResult::failure(SqavStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Status of a result handle; `INTERNAL_ERROR` for NULL.
///
/// # Safety
/// `result` must be a handle from a run function (or NULL) that has not been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn sqav_result_status(result: *const SqavResult) -> SqavStatus {
    if result.is_null() {
        return SqavStatus::InternalError;
    }
    (*result).status
}

/// Borrowed pointer to the result's JSON report, or NULL when the call
/// failed before producing one. Valid until the handle is freed.
///
/// # Safety
/// As for `sqav_result_status`.
#[no_mangle]
pub unsafe extern "C" fn sqav_result_json(result: *const SqavResult) -> *const c_char {
    if result.is_null() {
        return std::ptr::null();
    }
    (*result)
        .json
        .as_ref()
        .map_or(std::ptr::null(), |s| s.as_ptr())
}

/// Borrowed pointer to the error message, or NULL on success. Valid until
/// the handle is freed.
///
/// # Safety
/// As for `sqav_result_status`.
#[no_mangle]
pub unsafe extern "C" fn sqav_result_error(result: *const SqavResult) -> *const c_char {
    if result.is_null() {
        return std::ptr::null();
    }
    (*result)
        .error
        .as_ref()
        .map_or(std::ptr::null(), |s| s.as_ptr())
}

/// Release a result handle. NULL is a no-op; freeing twice is undefined.
///
/// # Safety
/// `result` must be NULL or an unfreed handle from a run function.
#[no_mangle]
pub unsafe extern "C" fn sqav_result_free(result: *mut SqavResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Exact probability that `x` intercepted particles all avoid the security
/// tests, written to `out`. Returns `INVALID_ARGUMENT` when `x` exceeds the
/// distributed rows or `out` is NULL.
///
/// # Safety
/// `out` must be NULL or point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn sqav_intercept_escape_probability(
    n: usize,
    delta0: usize,
    x: usize,
    out: *mut c_double,
) -> SqavStatus {
    if out.is_null() {
        return SqavStatus::InvalidArgument;
    }
    match pass_probability_intercept(n, delta0, x) {
        Ok(p) => {
            *out = p;
            SqavStatus::Ok
        }
        Err(_) => SqavStatus::InvalidArgument,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sqav_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
