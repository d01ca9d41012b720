/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef CRN_GAME_H
#define CRN_GAME_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum CrnStatus {
  CRN_STATUS_OK = 0,
  CRN_STATUS_NULL_POINTER = 1,
  CRN_STATUS_INVALID_ARGUMENT = 2,
  CRN_STATUS_INVALID_PARAMS = 3,
  CRN_STATUS_GENERATION = 4,
  CRN_STATUS_IO = 5,
  CRN_STATUS_PARSE = 6,
  CRN_STATUS_INVARIANT = 7,
  CRN_STATUS_INTERNAL = 99,
} CrnStatus;

typedef enum CrnGame {
  CRN_GAME_LLG = 0,
  CRN_GAME_LFG = 1,
  CRN_GAME_PFG = 2,
  CRN_GAME_CLG = 3,
} CrnGame;

/**
 * Opaque scenario handle.
 */
typedef struct CrnScenario CrnScenario;

/**
 * Scenario generation parameters. Powers and thresholds are logarithmic.
 */
typedef struct CrnParams {
  size_t n_nodes;
  double side_length;
  size_t n_channels;
  double region_size;
  size_t channel_subset_min;
  size_t channel_subset_max;
  double p_max_dbm;
  size_t q_levels;
  double path_loss_exp;
  double sinr_threshold_db;
  double noise_power_dbm;
  size_t max_hops;
  size_t n_flows;
  uint64_t seed;
} CrnParams;

/**
 * Outcome of one game run.
 */
typedef struct CrnRunMetrics {
  size_t flows_requested;
  size_t flows_active;
  /**
   * NaN when no flow is active.
   */
  double mean_links_per_active_flow;
  double normalized_flow_steps;
  size_t cycles;
  bool converged;
} CrnRunMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL if none failed.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *crn_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *crn_version(void);

/**
 * Fills `out` with the default simulation parameters (200 nodes, 10 flows).
 *
 * # Safety
 * `out` must be NULL or point to writable memory for one `CrnParams`.
 */
enum CrnStatus crn_params_default(struct CrnParams *out);

/**
 * Generates a random scenario. On success `*out` owns a new handle.
 *
 * # Safety
 * `params` must be NULL or point to a valid `CrnParams`; `out` must be NULL
 * or writable.
 */
enum CrnStatus crn_scenario_generate(const struct CrnParams *params, struct CrnScenario **out);

/**
 * Reads a scenario file. On success `*out` owns a new handle.
 *
 * # Safety
 * `path` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
 */
enum CrnStatus crn_scenario_load(const char *path, struct CrnScenario **out);

/**
 * Writes `scenario` to `path` as JSON.
 *
 * # Safety
 * `scenario` must be NULL or a live handle; `path` must be NULL or a
 * NUL-terminated string.
 */
enum CrnStatus crn_scenario_save(const struct CrnScenario *scenario, const char *path);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `scenario` must be NULL or a handle not yet freed.
 */
void crn_scenario_free(struct CrnScenario *scenario);

/**
 * Parameters the scenario was built with.
 *
 * # Safety
 * `scenario` must be NULL or a live handle; `out` must be NULL or writable.
 */
enum CrnStatus crn_scenario_params(const struct CrnScenario *scenario, struct CrnParams *out);

/**
 * Number of nodes; 0 for NULL.
 *
 * # Safety
 * `scenario` must be NULL or a live handle.
 */
size_t crn_scenario_node_count(const struct CrnScenario *scenario);

/**
 * Number of flows; 0 for NULL.
 *
 * # Safety
 * `scenario` must be NULL or a live handle.
 */
size_t crn_scenario_flow_count(const struct CrnScenario *scenario);

/**
 * Number of directed links over all flows; 0 for NULL.
 *
 * # Safety
 * `scenario` must be NULL or a live handle.
 */
size_t crn_scenario_link_count(const struct CrnScenario *scenario);

/**
 * Plays `game` (a `CrnGame` value) on `scenario` from the all-OFF profile.
 * `max_cycles` and `search_node_cap` of 0 select the defaults.
 *
 * # Safety
 * `scenario` must be NULL or a live handle; `out` must be NULL or writable.
 */
enum CrnStatus crn_run_game(const struct CrnScenario *scenario,
                            uint32_t game,
                            size_t max_cycles,
                            uint64_t search_node_cap,
                            struct CrnRunMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CRN_GAME_H */
