/* Copyright 2026 collapse-lab Contributors */
/* SPDX-License-Identifier: Apache-2.0 */

#include <math.h>
#include <stdio.h>
#include <string.h>

#include "collapse_lab.h"

static int fail(const char *what) {
  const char *msg = collapse_lab_last_error();
  fprintf(stderr, "%s: %s\n", what, msg ? msg : "(no message)");
  return 1;
}

int main(void) {
  CollapseLabConstants *c = NULL;
  if (collapse_lab_constants_new(NULL, &c) != COLLAPSE_LAB_STATUS_OK) return fail("constants");

  double v = 0.0;
  if (collapse_lab_x2t3_variance(c, 1e-16, 1e-7, 1.0, &v) != COLLAPSE_LAB_STATUS_OK || !(v > 0.0))
    return fail("x2t3");
  if (collapse_lab_x2t3_variance(c, -1.0, 1e-7, 1.0, &v) != COLLAPSE_LAB_STATUS_INVALID_ARGUMENT)
    return fail("negative lambda accepted");
  if (collapse_lab_last_error() == NULL) return fail("no message");

  CollapseLabGridSpec spec = collapse_lab_grid_spec_default();
  spec.r_c_points = 11;
  spec.lambda_points = 11;
  CollapseLabExclusionGrid *g = NULL;
  if (collapse_lab_exclusion_new(c, NULL, &spec, &g) != COLLAPSE_LAB_STATUS_OK) return fail("exclusion");
  if (collapse_lab_exclusion_r_c_len(g) != 11 || collapse_lab_exclusion_lambda_len(g) != 11)
    return fail("grid size");
  size_t excluded = 0;
  for (size_t i = 0; i < 11; i++) {
    for (size_t j = 0; j < 11; j++) {
      CollapseLabVerdict verdict;
      if (collapse_lab_exclusion_verdict(g, i, j, &verdict) != COLLAPSE_LAB_STATUS_OK) return fail("verdict");
      excluded += verdict == COLLAPSE_LAB_VERDICT_EXCLUDED;
    }
  }
  collapse_lab_exclusion_free(g);

  char *json = NULL;
  if (collapse_lab_run_json("{\"subcommand\": \"predict\"}", c, &json) != COLLAPSE_LAB_STATUS_OK)
    return fail("run_json");
  int has_tables = strstr(json, "\"tables\"") != NULL;
  collapse_lab_string_free(json);
  collapse_lab_constants_free(c);

  printf("version %s, %zu excluded cells\n", collapse_lab_version(), excluded);
  return has_tables && excluded > 0 ? 0 : 1;
}
