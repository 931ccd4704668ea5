#ifndef JOBMARKET_H
#define JOBMARKET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum JmFloorRule {
  // Firms keep at least their previous number of workers.
  JM_FLOOR_RULE_OCCUPANCY = 0,
  // Firms that had workers keep at least one.
  JM_FLOOR_RULE_NONEMPTY = 1,
} JmFloorRule;

// Result of every fallible call.
typedef enum JmStatus {
  JM_STATUS_OK = 0,
  JM_STATUS_NULL_ARGUMENT = 1,
  JM_STATUS_INVALID_UTF8 = 2,
  JM_STATUS_PARSE_ERROR = 3,
  JM_STATUS_INVALID_INSTANCE = 4,
  // A runtime invariant failed inside the solver.
  JM_STATUS_SOLVER_FAILURE = 5,
  // The outcome does not fit the instance.
  JM_STATUS_OUTCOME_MISMATCH = 6,
  JM_STATUS_PANIC = 7,
} JmStatus;

typedef enum JmPs2Domain {
  JM_PS2_DOMAIN_UNMATCHED = 0,
  JM_PS2_DOMAIN_ALL = 1,
} JmPs2Domain;

// A validated market.
typedef struct JmInstance JmInstance;

// A finished solver run.
typedef struct JmSolution JmSolution;

typedef struct JmSolveOptions {
  bool assert_invariants;
  enum JmFloorRule floor_rule;
} JmSolveOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Default options: invariants asserted, occupancy floors.
struct JmSolveOptions jm_solve_options_default(void);

// Parses and validates an instance document.
//
// # Safety
// `json` must be a nul-terminated string and `out` a valid pointer.
enum JmStatus jm_instance_from_json(const char *json, struct JmInstance **out);

// # Safety
// `instance` must come from [`jm_instance_from_json`] or be null.
void jm_instance_free(struct JmInstance *instance);

// Runs the solver. `options` may be null for the defaults.
//
// # Safety
// `instance` must be a live handle, `options` null or valid, `out` valid.
enum JmStatus jm_solve(const struct JmInstance *instance,
                       const struct JmSolveOptions *options,
                       struct JmSolution **out);

// # Safety
// `solution` must come from [`jm_solve`] or be null.
void jm_solution_free(struct JmSolution *solution);

// Matching rounds the run took, or 0 for a null handle.
//
// # Safety
// `solution` must be a live handle or null.
uint64_t jm_solution_iterations(const struct JmSolution *solution);

// The outcome document of a solution.
//
// # Safety
// `instance` must be the handle the solution was computed from.
enum JmStatus jm_outcome_to_json(const struct JmInstance *instance,
                                 const struct JmSolution *solution,
                                 char **out);

// The trace of a solution, one JSON record per line.
//
// # Safety
// `solution` must be a live handle and `out` valid.
enum JmStatus jm_trace_to_jsonl(const struct JmSolution *solution, char **out);

// Checks an outcome document against `instance`. On success `*stable`
// holds the verdict; when unstable and `report` is non-null it receives a
// JSON description of the violations.
//
// # Safety
// `instance` must be live, `outcome_json` nul-terminated, `stable` valid,
// `report` null or valid.
enum JmStatus jm_check(const struct JmInstance *instance,
                       const char *outcome_json,
                       enum JmPs2Domain domain,
                       bool *stable,
                       char **report);

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *jm_last_error_message(void);

// # Safety
// `text` must come from this library or be null.
void jm_string_free(char *text);

// Library version, statically allocated.
const char *jm_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JOBMARKET_H */
