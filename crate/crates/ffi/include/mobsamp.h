#ifndef MOBSAMP_H
#define MOBSAMP_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every entry point.
 */
typedef enum MsStatus {
  MS_STATUS_OK = 0,
  MS_STATUS_NULL_POINTER = 1,
  MS_STATUS_INVALID_UTF8 = 2,
  /**
   * Input JSON does not match the schema.
   */
  MS_STATUS_SCHEMA_ERROR = 3,
  /**
   * A library routine rejected valid-looking input.
   */
  MS_STATUS_MODULE_ERROR = 4,
  MS_STATUS_IO_ERROR = 5,
  MS_STATUS_PANIC = 6,
} MsStatus;

/**
 * Opaque compact convex body.
 */
typedef struct MsBody MsBody;

/**
 * Opaque discrete set.
 */
typedef struct MsSet MsSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a body from JSON (`{"kind":"disk",...}` or `{"kind":"polygon",...}`).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum MsStatus ms_body_from_json(const char *json, struct MsBody **out);

/**
 * Convex hull of `n` points stored as `x0, y0, x1, y1, …`.
 *
 * # Safety
 * `xy` must point to `2n` doubles; `out` must be writable.
 */
enum MsStatus ms_body_polygon(const double *xy, size_t n, struct MsBody **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum MsStatus ms_body_disk(double cx, double cy, double radius, struct MsBody **out);

/**
 * Releases a body; null is ignored.
 *
 * # Safety
 * `body` must come from this library and not be used afterwards.
 */
void ms_body_free(struct MsBody *body);

/**
 * Support function `H(y) = max_{x∈Ω} ⟨x, y⟩`.
 *
 * # Safety
 * `body` must be a live handle; `out` must be writable.
 */
enum MsStatus ms_support(const struct MsBody *body, double y1, double y2, double *out);

/**
 * Parses a discrete set from JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum MsStatus ms_set_from_json(const char *json, struct MsSet **out);

/**
 * Releases a set; null is ignored.
 *
 * # Safety
 * `set` must come from this library and not be used afterwards.
 */
void ms_set_free(struct MsSet *set);

/**
 * `θ(t)`: number of points in the open disk (interval) of radius `t`.
 *
 * # Safety
 * `set` must be a live handle; `out` must be writable.
 */
enum MsStatus ms_counting(const struct MsSet *set, double t, uint64_t *out);

/**
 * Monte-Carlo estimate of `α` with its standard error.
 *
 * # Safety
 * `value` and `std_error` must be writable.
 */
enum MsStatus ms_estimate_alpha(size_t samples, uint64_t seed, double *value, double *std_error);

/**
 * Stable-sampling verdict as JSON; release it with [`ms_string_free`].
 *
 * # Safety
 * Inputs must be NUL-terminated strings; `out_json` must be writable.
 */
enum MsStatus ms_decide_json(const char *spectrum_json,
                             const char *trajectory_json,
                             char **out_json);

/**
 * Runs a scenario document; `out_dir` (may be null for `.`) receives CSV
 * files of `emit` tasks.
 *
 * # Safety
 * `scenario_json` and a non-null `out_dir` must be NUL-terminated strings;
 * `out_json` must be writable.
 */
enum MsStatus ms_run_scenario(const char *scenario_json, const char *out_dir, char **out_json);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void ms_string_free(char *s);

/**
 * Message of the last failure on this thread, empty after a success.
 * Valid until the next call into the library on the same thread.
 */
const char *ms_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ms_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOBSAMP_H */
