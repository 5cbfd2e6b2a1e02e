#ifndef RELIP_H
#define RELIP_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a library call.
 */
typedef enum RelipStatus {
  RELIP_STATUS_OK = 0,
  /**
   * Verdicts were computed but the hypotheses of the checked result do not hold.
   */
  RELIP_STATUS_HYPOTHESES_UNMET = 1,
  RELIP_STATUS_NULL_POINTER = 2,
  RELIP_STATUS_INVALID_UTF8 = 3,
  RELIP_STATUS_PARSE = 4,
  RELIP_STATUS_INVALID_PARAMETER = 5,
  RELIP_STATUS_DIMENSION_MISMATCH = 6,
  RELIP_STATUS_POINT_NOT_IN_SET = 7,
  RELIP_STATUS_DIMENSION_CAP = 8,
  RELIP_STATUS_UNDECIDED = 9,
  RELIP_STATUS_SEARCH_FAILED = 10,
  RELIP_STATUS_UNSUPPORTED = 11,
  RELIP_STATUS_UNKNOWN_NAME = 12,
  RELIP_STATUS_IO = 13,
  RELIP_STATUS_PANIC = 14,
} RelipStatus;

/**
 * Parameter overrides for `relip_run`.
 */
typedef struct RelipOptions RelipOptions;

/**
 * A parsed and validated problem file.
 */
typedef struct RelipProblem RelipProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Owned by the library and
 * valid until the next failing call on the same thread.
 */
const char *relip_last_error(void);

/**
 * Library version as a static string.
 */
const char *relip_version(void);

/**
 * Sets the process-wide dimension cap for generator enumeration.
 */
void relip_set_dimension_cap(size_t cap);

/**
 * Parses a JSON problem document.
 *
 * # Safety
 * `text` must be a valid nul-terminated string and `out` a valid pointer.
 */
enum RelipStatus relip_problem_parse(const char *text, struct RelipProblem **out);

/**
 * Releases a problem; null is ignored.
 *
 * # Safety
 * `problem` must come from `relip_problem_parse` and not be used afterwards.
 */
void relip_problem_free(struct RelipProblem *problem);

/**
 * Fresh options with every parameter taken from the problem file.
 */
struct RelipOptions *relip_options_new(void);

/**
 * Sets one parameter: `eps`, `delta`, `grid`, `radius` or `nu` (rationals such as
 * `"1/4"`), or `budget` (a nonnegative integer).
 *
 * # Safety
 * `options` must come from `relip_options_new`; `key` and `value` must be valid strings.
 */
enum RelipStatus relip_options_set(struct RelipOptions *options,
                                   const char *key,
                                   const char *value);

/**
 * Releases options; null is ignored.
 *
 * # Safety
 * `options` must come from `relip_options_new` and not be used afterwards.
 */
void relip_options_free(struct RelipOptions *options);

/**
 * Runs a command (`cone`, `coderivative`, `lipschitz`, `regularity`, `verify-chain`,
 * `verify-sum`, `extremal`, `fuzzy`) and writes the JSON report to `out_json`.
 *
 * Returns `RELIP_STATUS_HYPOTHESES_UNMET` with a report when the verdicts were computed
 * under unmet hypotheses. `options` may be null.
 *
 * # Safety
 * Handles must come from this library; `command` must be a valid string and `out_json`
 * a valid pointer.
 */
enum RelipStatus relip_run(const struct RelipProblem *problem,
                           const char *command,
                           const struct RelipOptions *options,
                           char **out_json);

/**
 * Releases a string returned by the library; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void relip_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RELIP_H */
