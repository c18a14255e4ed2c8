#ifndef EDGECACHE_H
#define EDGECACHE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum EcStatus {
  EC_STATUS_OK = 0,
  EC_STATUS_NULL_POINTER = 1,
  EC_STATUS_INVALID_UTF8 = 2,
  EC_STATUS_CONFIG_ERROR = 3,
  EC_STATUS_INTRACTABLE = 4,
  EC_STATUS_BUDGET_EXCEEDED = 5,
  EC_STATUS_SOLVER_LIMIT = 6,
  EC_STATUS_INFEASIBLE = 7,
  EC_STATUS_OUT_OF_RANGE = 8,
  EC_STATUS_INTERNAL = 9,
} EcStatus;

/**
 * A placement with its score.
 */
typedef struct EcReport EcReport;

/**
 * A validated network instance.
 */
typedef struct EcScenario EcScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. The pointer stays valid
 * until the next failing call on the same thread.
 */
const char *ec_last_error_message(void);

/**
 * Library version, static storage.
 */
const char *ec_version(void);

/**
 * Builds a scenario from a TOML config.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum EcStatus ec_scenario_from_toml(const char *toml, struct EcScenario **out);

/**
 * Generates a scenario with the default parameters, `node_count` nodes (base
 * station included), `content_count` contents and `capacity_gb` of storage
 * at every node.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum EcStatus ec_scenario_generate(size_t node_count,
                                   size_t content_count,
                                   double capacity_gb,
                                   uint64_t seed,
                                   struct EcScenario **out);

/**
 * # Safety
 * `scenario` must come from this library or be null.
 */
void ec_scenario_free(struct EcScenario *scenario);

/**
 * Node count, base station included; 0 for a null handle.
 *
 * # Safety
 * `scenario` must be a live handle or null.
 */
size_t ec_scenario_node_count(const struct EcScenario *scenario);

/**
 * Content count; 0 for a null handle.
 *
 * # Safety
 * `scenario` must be a live handle or null.
 */
size_t ec_scenario_content_count(const struct EcScenario *scenario);

/**
 * Total average delay (seconds) of a row-major `nodes x contents` 0/1
 * placement.
 *
 * # Safety
 * `placement` must point to `len` bytes.
 */
enum EcStatus ec_total_delay(const struct EcScenario *scenario,
                             const uint8_t *placement,
                             size_t len,
                             double *out);

/**
 * Runs a policy: `greedy`, `most-foa`, `guaranteed-greedy`,
 * `locally-optimal`, `distributed`, `centralized` or `oracle`.
 *
 * # Safety
 * `scenario` must be a live handle, `policy` a NUL-terminated string and
 * `out` a valid pointer.
 */
enum EcStatus ec_solve(const struct EcScenario *scenario,
                       const char *policy,
                       struct EcReport **out);

/**
 * Exhaustive optimum under an enumeration budget.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a valid pointer.
 */
enum EcStatus ec_oracle(const struct EcScenario *scenario, uint64_t budget, struct EcReport **out);

/**
 * # Safety
 * `report` must come from this library or be null.
 */
void ec_report_free(struct EcReport *report);

/**
 * # Safety
 * `report` must be a live handle and `out` a valid pointer.
 */
enum EcStatus ec_report_objective(const struct EcReport *report, double *out);

/**
 * Branch-and-bound nodes explored; 0 for other policies.
 *
 * # Safety
 * `report` must be a live handle and `out` a valid pointer.
 */
enum EcStatus ec_report_nodes_explored(const struct EcReport *report, uint64_t *out);

/**
 * Solver status string (`ok`, `eta_optimal` or `node_limit`), owned by the
 * report; null for a null handle.
 *
 * # Safety
 * `report` must be a live handle or null.
 */
const char *ec_report_status(const struct EcReport *report);

/**
 * Copies the row-major 0/1 placement into `buf`, which must hold exactly
 * `nodes x contents` bytes.
 *
 * # Safety
 * `buf` must point to `len` writable bytes.
 */
enum EcStatus ec_report_placement(const struct EcReport *report, uint8_t *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EDGECACHE_H */
