/* Generated by cbindgen; do not edit. */

#ifndef REGCOMP_H
#define REGCOMP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; `RC_STATUS_OK` is zero.
 */
typedef enum RcStatus {
  RC_STATUS_OK = 0,
  RC_STATUS_NULL_POINTER = 1,
  RC_STATUS_INVALID_UTF8 = 2,
  RC_STATUS_DIMENSION_MISMATCH = 3,
  RC_STATUS_INVALID_MODEL = 4,
  RC_STATUS_INVALID_REGULARIZER = 5,
  RC_STATUS_INVALID_ARGUMENT = 6,
  RC_STATUS_INCOMPATIBLE = 7,
  RC_STATUS_UNSUPPORTED = 8,
  RC_STATUS_TOO_LARGE = 9,
  RC_STATUS_UNDEFINED = 10,
  RC_STATUS_NUMERICAL = 11,
  RC_STATUS_PANIC = 12,
} RcStatus;

/**
 * A model set.
 */
typedef struct RcModel RcModel;

/**
 * A regularizer paired with the model it was parsed for.
 */
typedef struct RcRegularizer RcRegularizer;

/**
 * A compliance report.
 */
typedef struct RcReport RcReport;

/**
 * Scalar fields of a compliance report; absent values are NaN.
 */
typedef struct RcReportValues {
  double delta_nec;
  double delta_suff;
  /**
   * May be +infinity.
   */
  double gamma_nec;
  double b_value;
  double d_value;
} RcReportValues;

/**
 * Optimal two-level weights.
 */
typedef struct RcLevelsOptimum {
  double nu1_star;
  /**
   * `w2 / w1`.
   */
  double ratio;
  double b_value;
  double delta_nec;
  double delta_nec_reference;
  double c1;
  double c2;
} RcLevelsOptimum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty after a success. The
 * pointer stays valid until the next call into this library on the thread.
 */
const char *rc_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rc_version(void);

/**
 * Parses `sparse:k=..,n=..`, `lowrank:r=..,n=..` or
 * `levels:k1=..,k2=..,n1=..,n2=..`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RcStatus rc_model_parse(const char *spec, struct RcModel **out);

/**
 * # Safety
 * `model` must come from `rc_model_parse` and not be used afterwards.
 */
void rc_model_free(struct RcModel *model);

/**
 * Number of `double`s in a point of the model.
 *
 * # Safety
 * `model` must be a live handle or null (returns 0).
 */
size_t rc_model_point_len(const struct RcModel *model);

/**
 * Orthogonal projection of `z` onto the model set, written to `out`
 * (same length as `z`).
 *
 * # Safety
 * `z` and `out` must point to `len` doubles.
 */
enum RcStatus rc_model_project(const struct RcModel *model,
                               const double *z,
                               size_t len,
                               double *out);

/**
 * Gauge of `z` for the convex hull of unit-norm model elements.
 *
 * # Safety
 * `z` must point to `len` doubles and `out` be a valid pointer.
 */
enum RcStatus rc_model_norm(const struct RcModel *model, const double *z, size_t len, double *out);

/**
 * Parses `l1`, `nuclear`, `wl1:w1,w2,..`, `levels:w1=..,w2=..` or inline
 * JSON for `model`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `model` a live handle; `out` valid.
 */
enum RcStatus rc_regularizer_parse(const char *spec,
                                   const struct RcModel *model,
                                   struct RcRegularizer **out);

/**
 * # Safety
 * `reg` must come from `rc_regularizer_parse` and not be used afterwards.
 */
void rc_regularizer_free(struct RcRegularizer *reg);

/**
 * Value of the regularizer at `x`.
 *
 * # Safety
 * `x` must point to `len` doubles and `out` be a valid pointer.
 */
enum RcStatus rc_regularizer_eval(const struct RcRegularizer *reg,
                                  const struct RcModel *model,
                                  const double *x,
                                  size_t len,
                                  double *out);

/**
 * Whether `z` lies in the descent cone of `reg` at the model set. Finite
 * atomic norms answer `true` only with a verified witness.
 *
 * # Safety
 * `z` must point to `len` doubles and `out` be a valid pointer.
 */
enum RcStatus rc_in_descent_cone(const struct RcRegularizer *reg,
                                 const struct RcModel *model,
                                 const double *z,
                                 size_t len,
                                 bool *out);

/**
 * Compliance report; `samples` and `seed` drive the sampled estimator used
 * when no closed form applies, `workers = 0` uses all cores.
 *
 * # Safety
 * Handles must be live and `out` valid.
 */
enum RcStatus rc_compliance(const struct RcModel *model,
                            const struct RcRegularizer *reg,
                            uint64_t samples,
                            uint64_t seed,
                            size_t workers,
                            struct RcReport **out);

/**
 * # Safety
 * `report` must be a live handle and `out` valid.
 */
enum RcStatus rc_report_values(const struct RcReport *report, struct RcReportValues *out);

/**
 * The full report as JSON, freed with `rc_string_free`.
 *
 * # Safety
 * `report` must be a live handle and `out` valid.
 */
enum RcStatus rc_report_json(const struct RcReport *report, char **out);

/**
 * # Safety
 * `report` must come from `rc_compliance` and not be used afterwards.
 */
void rc_report_free(struct RcReport *report);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void rc_string_free(char *s);

/**
 * Optimal two-level weights by grid search over the first-level share.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum RcStatus rc_optimal_weights(size_t k1,
                                 size_t k2,
                                 size_t n1,
                                 size_t n2,
                                 size_t grid,
                                 struct RcLevelsOptimum *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REGCOMP_H */
