/* C interface to the ccnsim cache simulator. */

#ifndef CCNSIM_H
#define CCNSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every fallible call.
 */
typedef enum CcnStatus {
  CCN_STATUS_OK = 0,
  CCN_STATUS_NULL_POINTER = 1,
  CCN_STATUS_INVALID_UTF8 = 2,
  CCN_STATUS_PARSE = 3,
  CCN_STATUS_INVALID_ARGUMENT = 4,
  CCN_STATUS_NOT_FOUND = 5,
  CCN_STATUS_RUN_FAILED = 6,
  CCN_STATUS_BUFFER_TOO_SMALL = 7,
  /**
   * The requested metric has no value (nothing was delivered).
   */
  CCN_STATUS_UNDEFINED = 8,
  CCN_STATUS_PANIC = 9,
} CcnStatus;

/**
 * Metrics of one finished run.
 */
typedef struct CcnReport CcnReport;

/**
 * One scenario configuration.
 */
typedef struct CcnScenario CcnScenario;

/**
 * Network graph with per-link delays.
 */
typedef struct CcnTopology CcnTopology;

/**
 * Aggregate counters of a run.
 */
typedef struct CcnCounters {
  uint64_t cache_hits;
  uint64_t cache_misses;
  uint64_t producer_hits;
  uint64_t chunk_interests;
  uint64_t deliveries;
  uint64_t hops_total;
  uint64_t replications;
  uint64_t opportunistic_insertions;
  uint64_t object_requests;
  uint64_t events;
  uint64_t seed;
  uint32_t producer;
} CcnCounters;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Free with
 * `ccn_string_free`.
 */
char *ccn_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void ccn_string_free(char *s);

/**
 * Library version, static.
 */
const char *ccn_version(void);

/**
 * CSV header matching `ccn_report_csv_row`, static.
 */
const char *ccn_csv_header(void);

/**
 * Loads a builtin topology ("abilene", "dtelecom").
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum CcnStatus ccn_topology_builtin(const char *name, struct CcnTopology **out);

/**
 * Parses topology text (`a b delay_ms` per line, `#` comments).
 *
 * # Safety
 * `name` and `text` must be NUL-terminated strings; `out` must be writable.
 */
enum CcnStatus ccn_topology_parse(const char *name, const char *text, struct CcnTopology **out);

/**
 * # Safety
 * `topo` must be NULL or a live handle from this library.
 */
void ccn_topology_free(struct CcnTopology *topo);

/**
 * Number of routers; 0 for NULL.
 *
 * # Safety
 * `topo` must be NULL or a live handle.
 */
size_t ccn_topology_node_count(const struct CcnTopology *topo);

/**
 * Writes one betweenness score per router into `out[0..len)`.
 * `len` must be at least the node count.
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum CcnStatus ccn_topology_betweenness(const struct CcnTopology *topo, double *out, size_t len);

/**
 * Canonical shortest path from `from` to `to`, endpoints included.
 * `*out_len` receives the path length even when `cap` is too small.
 *
 * # Safety
 * `out` must point to `cap` writable integers; `out_len` must be writable.
 */
enum CcnStatus ccn_topology_shortest_path(const struct CcnTopology *topo,
                                          uint32_t from,
                                          uint32_t to,
                                          uint32_t *out,
                                          size_t cap,
                                          size_t *out_len);

/**
 * Default scenario (small custom setup on Abilene).
 *
 * # Safety
 * `out` must be writable.
 */
enum CcnStatus ccn_scenario_new(struct CcnScenario **out);

/**
 * Parses a `key = value` scenario document.
 *
 * # Safety
 * `text` must be NUL-terminated; `out` must be writable.
 */
enum CcnStatus ccn_scenario_parse(const char *text, struct CcnScenario **out);

/**
 * One of the six presets: isp_100GB, isp_1TB, vod_25GB, vod_250GB,
 * osn_10GB, osn_100GB.
 *
 * # Safety
 * `name` must be NUL-terminated; `out` must be writable.
 */
enum CcnStatus ccn_scenario_preset(const char *name, struct CcnScenario **out);

/**
 * Sets one key as in a scenario file.
 *
 * # Safety
 * `scenario` must be a live handle; `key`, `value` NUL-terminated.
 */
enum CcnStatus ccn_scenario_set(struct CcnScenario *scenario, const char *key, const char *value);

/**
 * The scenario as a `key = value` document, or NULL for a NULL handle.
 * Free with `ccn_string_free`.
 *
 * # Safety
 * `scenario` must be NULL or a live handle.
 */
char *ccn_scenario_to_string(const struct CcnScenario *scenario);

/**
 * Resolves the scenario's topology: a builtin name, else a file path
 * relative to `base_dir` (which may be NULL).
 *
 * # Safety
 * `scenario` must be a live handle, `base_dir` NULL or NUL-terminated,
 * `out` writable.
 */
enum CcnStatus ccn_scenario_load_topology(const struct CcnScenario *scenario,
                                          const char *base_dir,
                                          struct CcnTopology **out);

/**
 * # Safety
 * `scenario` must be NULL or a live handle from this library.
 */
void ccn_scenario_free(struct CcnScenario *scenario);

/**
 * Runs the scenario on `topo` to completion.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum CcnStatus ccn_run(const struct CcnScenario *scenario,
                       const struct CcnTopology *topo,
                       struct CcnReport **out);

/**
 * # Safety
 * `report` must be NULL or a live handle from this library.
 */
void ccn_report_free(struct CcnReport *report);

/**
 * Share of chunk requests served from caches. `CCN_STATUS_UNDEFINED` when
 * no request was measured.
 *
 * # Safety
 * `report` must be a live handle; `out` writable.
 */
enum CcnStatus ccn_report_cache_hit_ratio(const struct CcnReport *report, double *out);

/**
 * # Safety
 * `report` must be a live handle; `out` writable.
 */
enum CcnStatus ccn_report_avg_hops(const struct CcnReport *report, double *out);

/**
 * # Safety
 * `report` must be a live handle; `out` writable.
 */
enum CcnStatus ccn_report_avg_delay_ms(const struct CcnReport *report, double *out);

/**
 * # Safety
 * `report` must be a live handle; `out` writable.
 */
enum CcnStatus ccn_report_counters(const struct CcnReport *report, struct CcnCounters *out);

/**
 * The report as one CSV row (no newline), or NULL for a NULL handle.
 * Free with `ccn_string_free`.
 *
 * # Safety
 * `report` must be NULL or a live handle.
 */
char *ccn_report_csv_row(const struct CcnReport *report);

/**
 * Daily traffic saved, in decimal TB rounded to 0.1.
 *
 * # Safety
 * `out` must be writable.
 */
enum CcnStatus ccn_traffic_savings(double daily_volume_tb, double hit_ratio, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CCNSIM_H */
