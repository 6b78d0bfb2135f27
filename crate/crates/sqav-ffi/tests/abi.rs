//! Exercises the C surface exactly as a foreign caller would: NUL-terminated
//! strings in, status codes and borrowed JSON out.

use std::ffi::{CStr, CString};

use sqav_ffi::{
    sqav_amc_run, sqav_attack_run, sqav_intercept_escape_probability, sqav_result_error,
    sqav_result_free, sqav_result_json, sqav_result_status, sqav_verify_run, sqav_version,
    sqav_vote_run, SqavStatus,
};

fn json_of(result: *mut sqav_ffi::SqavResult) -> serde_json::Value {
    let ptr = unsafe { sqav_result_json(result) };
    assert!(!ptr.is_null());
    let text = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap();
    serde_json::from_str(text).unwrap()
}

#[test]
fn vote_run_returns_the_worked_example_transcript() {
    let config = CString::new(
        serde_json::json!({
            "n": 4, "m": 3, "delta0": 1, "delta1": 1, "seed": 7,
            "votes": [1, 2, 1, 0],
            "fixture": {
                "ballots": [[0,1,2,0],[2,2,1,1],[1,0,2,0],[0,1,1,1]],
                "indices": [1, 0, 3, 2]
            }
        })
        .to_string(),
    )
    .unwrap();
    let result = unsafe { sqav_vote_run(config.as_ptr()) };
    assert_eq!(unsafe { sqav_result_status(result) }, SqavStatus::Ok);
    let transcript = json_of(result);
    assert_eq!(transcript["tally"]["box_sums"], serde_json::json!([2, 1, 0, 1]));
    assert!(unsafe { sqav_result_error(result) }.is_null());
    unsafe { sqav_result_free(result) };
}

#[test]
fn invalid_json_reports_invalid_argument() {
    let config = CString::new("{not json").unwrap();
    let result = unsafe { sqav_vote_run(config.as_ptr()) };
    assert_eq!(
        unsafe { sqav_result_status(result) },
        SqavStatus::InvalidArgument
    );
    assert!(unsafe { sqav_result_json(result) }.is_null());
    let err = unsafe { CStr::from_ptr(sqav_result_error(result)) };
    assert!(!err.to_str().unwrap().is_empty());
    unsafe { sqav_result_free(result) };
}

#[test]
fn null_config_is_rejected_not_crashed() {
    let result = unsafe { sqav_vote_run(std::ptr::null()) };
    assert_eq!(
        unsafe { sqav_result_status(result) },
        SqavStatus::InvalidArgument
    );
    unsafe { sqav_result_free(result) };
    unsafe { sqav_result_free(std::ptr::null_mut()) }; // no-op
}

#[test]
fn amc_run_reports_sum_and_ranking() {
    let config = CString::new(
        serde_json::json!({
            "parties": 3, "input_counts": [1,1,1], "values": [[2],[3],[6]],
            "m": 7, "delta2": 1, "delta3": 1, "seed": 9,
            "mode": "exact", "ranking": true
        })
        .to_string(),
    )
    .unwrap();
    let result = unsafe { sqav_amc_run(config.as_ptr()) };
    assert_eq!(unsafe { sqav_result_status(result) }, SqavStatus::Ok);
    let report = json_of(result);
    assert_eq!(report["sum"], 11);
    assert_eq!(report["ranking"], serde_json::json!([6, 3, 2]));
    unsafe { sqav_result_free(result) };
}

#[test]
fn verify_run_reports_failure_status_for_corrupted_fixture() {
    let config = CString::new(
        serde_json::json!({
            "max_n": 3, "max_m": 2, "seed": 3,
            "random_states": 4, "random_unitaries": 2,
            "inject_corruption": true
        })
        .to_string(),
    )
    .unwrap();
    let result = unsafe { sqav_verify_run(config.as_ptr()) };
    assert_eq!(
        unsafe { sqav_result_status(result) },
        SqavStatus::VerificationFailed
    );
    let report = json_of(result);
    assert_eq!(report["all_pass"], serde_json::json!(false));
    unsafe { sqav_result_free(result) };
}

#[test]
fn attack_run_agrees_with_predictions() {
    let config = CString::new(
        serde_json::json!({
            "attack": "intercept", "n": 4, "m": 2, "delta0": 2,
            "x_values": [1], "trials": 4000, "seed": 60001
        })
        .to_string(),
    )
    .unwrap();
    let result = unsafe { sqav_attack_run(config.as_ptr()) };
    assert_eq!(unsafe { sqav_result_status(result) }, SqavStatus::Ok);
    let report = json_of(result);
    assert_eq!(report["agreement"], serde_json::json!(true));
    assert!(report["rows"].as_array().unwrap().len() == 1);
    unsafe { sqav_result_free(result) };
}

#[test]
fn escape_probability_exact_values_cross_the_boundary() {
    let mut out = 0.0f64;
    let status = unsafe { sqav_intercept_escape_probability(4, 2, 1, &mut out) };
    assert_eq!(status, SqavStatus::Ok);
    assert!((out - 1.0 / 3.0).abs() < 1e-15);
    let status = unsafe { sqav_intercept_escape_probability(4, 2, 99, &mut out) };
    assert_eq!(status, SqavStatus::InvalidArgument);
    let status = unsafe { sqav_intercept_escape_probability(4, 2, 1, std::ptr::null_mut()) };
    assert_eq!(status, SqavStatus::InvalidArgument);
}

#[test]
fn version_is_a_readable_string() {
    let version = unsafe { CStr::from_ptr(sqav_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
