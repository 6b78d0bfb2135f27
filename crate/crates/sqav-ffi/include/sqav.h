#ifndef SQAV_H
#define SQAV_H

/* Generated by cbindgen from the sqav-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status of a finished call; numbering matches the CLI exit codes.
typedef enum SqavStatus {
  SQAV_STATUS_OK = 0,
  // Bad scenario JSON or parameters outside their legal range.
  SQAV_STATUS_INVALID_ARGUMENT = 2,
  // The protocol run aborted (failed security test or verification).
  SQAV_STATUS_PROTOCOL_ABORT = 3,
  // A verification suite or prediction-agreement check failed.
  SQAV_STATUS_VERIFICATION_FAILED = 4,
  SQAV_STATUS_INTERNAL_ERROR = 5,
} SqavStatus;

// Opaque run result: a status plus an owned JSON report and, on failure,
// an error message.
typedef struct SqavResult SqavResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Run one election scenario (the `vote` command's config schema).
// On success the result JSON is the full transcript.
//
// # Safety
// `config_json` must be a valid NUL-terminated string or NULL; the returned
// handle must be released with `sqav_result_free`.
struct SqavResult *sqav_vote_run(const char *config_json);

// Run one anonymous multi-party computation scenario (the `amc` command's
// config schema). On success the result JSON matches `amc_result.json`.
//
// # Safety
// As for `sqav_vote_run`.
struct SqavResult *sqav_amc_run(const char *config_json);

// Run the numerical verification suite (the `verify` command's config
// schema). Status is `VERIFICATION_FAILED` when any check fails; the
// result JSON is the full per-check report either way.
//
// # Safety
// As for `sqav_vote_run`.
struct SqavResult *sqav_verify_run(const char *config_json);

// Run an attack sweep (the `attack` command's config schema). Status is
// `VERIFICATION_FAILED` when any measurement disagrees with its prediction;
// the result JSON carries the sweep rows and the verdict.
//
// # Safety
// As for `sqav_vote_run`.
struct SqavResult *sqav_attack_run(const char *config_json);

// Status of a result handle; `INTERNAL_ERROR` for NULL.
//
// # Safety
// `result` must be a handle from a run function (or NULL) that has not been
// freed.
enum SqavStatus sqav_result_status(const struct SqavResult *result);

// Borrowed pointer to the result's JSON report, or NULL when the call
// failed before producing one. Valid until the handle is freed.
//
// # Safety
// As for `sqav_result_status`.
const char *sqav_result_json(const struct SqavResult *result);

// Borrowed pointer to the error message, or NULL on success. Valid until
// the handle is freed.
//
// # Safety
// As for `sqav_result_status`.
const char *sqav_result_error(const struct SqavResult *result);

// Release a result handle. NULL is a no-op; freeing twice is undefined.
//
// # Safety
// `result` must be NULL or an unfreed handle from a run function.
void sqav_result_free(struct SqavResult *result);

// Exact probability that `x` intercepted particles all avoid the security
// tests, written to `out`. Returns `INVALID_ARGUMENT` when `x` exceeds the
// distributed rows or `out` is NULL.
//
// # Safety
// `out` must be NULL or point to a writable double.
enum SqavStatus sqav_intercept_escape_probability(uintptr_t n,
                                                  uintptr_t delta0,
                                                  uintptr_t x,
                                                  double *out);

// Library version as a static NUL-terminated string.
const char *sqav_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SQAV_H */
