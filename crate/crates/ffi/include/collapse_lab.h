/* Copyright 2026 collapse-lab Contributors */
/* SPDX-License-Identifier: Apache-2.0 */

#ifndef COLLAPSE_LAB_H
#define COLLAPSE_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

// Result of every fallible call.
typedef enum CollapseLabStatus {
  COLLAPSE_LAB_STATUS_OK = 0,
  COLLAPSE_LAB_STATUS_NULL_POINTER = 1,
  COLLAPSE_LAB_STATUS_INVALID_ARGUMENT = 2,
  COLLAPSE_LAB_STATUS_CONFIG = 3,
  COLLAPSE_LAB_STATUS_NUMERICAL = 4,
  COLLAPSE_LAB_STATUS_IO = 5,
  COLLAPSE_LAB_STATUS_PANIC = 6,
} CollapseLabStatus;

// Verdict of one exclusion-grid cell.
typedef enum CollapseLabVerdict {
  COLLAPSE_LAB_VERDICT_EXCLUDED = 0,
  COLLAPSE_LAB_VERDICT_ALLOWED = 1,
  COLLAPSE_LAB_VERDICT_NO_DATA = 2,
} CollapseLabVerdict;

// Physical constants table.
typedef struct CollapseLabConstants CollapseLabConstants;

// Computed exclusion region.
typedef struct CollapseLabExclusionGrid CollapseLabExclusionGrid;

// Log-spaced `(r_C, lambda)` grid.
typedef struct CollapseLabGridSpec {
  double r_c_min;
  double r_c_max;
  size_t r_c_points;
  double lambda_min;
  double lambda_max;
  size_t lambda_points;
} CollapseLabGridSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static NUL-terminated string.
const char *collapse_lab_version(void);

// Message of the last failed call on this thread, or NULL. Valid until the next failing
// call on the same thread.
const char *collapse_lab_last_error(void);

// Releases a string returned by the library. NULL is ignored.
void collapse_lab_string_free(char *s);

// Loads constants from a JSON document, or the built-in table when `json` is NULL.
enum CollapseLabStatus collapse_lab_constants_new(const char *json,
                                                  struct CollapseLabConstants **out);

void collapse_lab_constants_free(struct CollapseLabConstants *c);

// Looks up a constant by its field name (`hbar`, `m0`, `g`, ...).
enum CollapseLabStatus collapse_lab_constants_get(const struct CollapseLabConstants *c,
                                                  const char *name,
                                                  double *out);

// Extra cold-atom position variance (m^2) after free evolution time `t`.
enum CollapseLabStatus collapse_lab_x2t3_variance(const struct CollapseLabConstants *c,
                                                  double lambda,
                                                  double r_c,
                                                  double t,
                                                  double *out);

// White-noise spontaneous photon emission rate (J^-1 s^-1) per atom at `energy_kev`.
enum CollapseLabStatus collapse_lab_photon_rate(const struct CollapseLabConstants *c,
                                                double energy_kev,
                                                double atomic_number,
                                                double lambda,
                                                double r_c,
                                                double *out);

// `-ln F` for white-noise CSL interference of a mass `m` with momentum transfer `k` and
// displacement `q` (3-vectors) after time `t`.
enum CollapseLabStatus collapse_lab_interference_exponent(const struct CollapseLabConstants *c,
                                                          const double *k,
                                                          const double *q,
                                                          double t,
                                                          double mass,
                                                          double lambda,
                                                          double r_c,
                                                          double *out);

// Diósi-Penrose decay time (s) of a superposition displaced by `d`; `radius = 0` selects a
// point mass smeared over `r0`.
enum CollapseLabStatus collapse_lab_dp_decay_time(const struct CollapseLabConstants *c,
                                                  double radius,
                                                  double mass,
                                                  double d,
                                                  double r0,
                                                  double *out);

// CSL centre-of-mass coherence decay rate (1/s) of a body displaced by `d`; `radius = 0`
// selects a point mass.
enum CollapseLabStatus collapse_lab_csl_decay_rate(const struct CollapseLabConstants *c,
                                                   double radius,
                                                   double mass,
                                                   double d,
                                                   double lambda,
                                                   double r_c,
                                                   double *out);

// Upper bound on lambda at `r_c` from the built-in constraint with the given id.
enum CollapseLabStatus collapse_lab_lambda_upper_bound(const struct CollapseLabConstants *c,
                                                       const char *constraint_id,
                                                       double r_c,
                                                       double *out);

// Default exclusion grid (121 x 161 over r_C in [1e-9, 1e-3] m, lambda in [1e-20, 1e-4] 1/s).
struct CollapseLabGridSpec collapse_lab_grid_spec_default(void);

// Builds the exclusion region. `constraints_json` is a JSON array of constraints, or NULL
// for the built-in suite; `spec` may be NULL for the default grid.
enum CollapseLabStatus collapse_lab_exclusion_new(const struct CollapseLabConstants *c,
                                                  const char *constraints_json,
                                                  const struct CollapseLabGridSpec *spec,
                                                  struct CollapseLabExclusionGrid **out);

void collapse_lab_exclusion_free(struct CollapseLabExclusionGrid *g);

// Number of r_C columns, 0 for NULL.
size_t collapse_lab_exclusion_r_c_len(const struct CollapseLabExclusionGrid *g);

// Number of lambda rows, 0 for NULL.
size_t collapse_lab_exclusion_lambda_len(const struct CollapseLabExclusionGrid *g);

enum CollapseLabStatus collapse_lab_exclusion_r_c(const struct CollapseLabExclusionGrid *g,
                                                  size_t i,
                                                  double *out);

enum CollapseLabStatus collapse_lab_exclusion_lambda(const struct CollapseLabExclusionGrid *g,
                                                     size_t j,
                                                     double *out);

// Tightest lambda bound in column `i`; NaN when no constraint applies there.
enum CollapseLabStatus collapse_lab_exclusion_lambda_max(const struct CollapseLabExclusionGrid *g,
                                                         size_t i,
                                                         double *out);

enum CollapseLabStatus collapse_lab_exclusion_verdict(const struct CollapseLabExclusionGrid *g,
                                                      size_t i,
                                                      size_t j,
                                                      enum CollapseLabVerdict *out);

// Id of the constraint binding column `i` as a new string (free with
// [`collapse_lab_string_free`]), or NULL when the column has no bound.
enum CollapseLabStatus collapse_lab_exclusion_binding(const struct CollapseLabExclusionGrid *g,
                                                      size_t i,
                                                      char **out);

// Runs a configuration without touching the file system and returns
// `{"tables": [{name, columns, rows}...], "documents": {file: text}}` as a new string.
// `c` may be NULL for the built-in constants.
enum CollapseLabStatus collapse_lab_run_json(const char *config_json,
                                             const struct CollapseLabConstants *c,
                                             char **out);

// Runs a configuration, writes its outputs to the configured directory and returns the
// run manifest as a new JSON string. `c` may be NULL for the built-in constants.
enum CollapseLabStatus collapse_lab_execute(const char *config_json,
                                            const struct CollapseLabConstants *c,
                                            char **manifest_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COLLAPSE_LAB_H */
