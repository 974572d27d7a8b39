#ifndef INSTAB_H
#define INSTAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum InstabStatus {
  INSTAB_STATUS_OK = 0,
  INSTAB_STATUS_NULL_POINTER = 1,
  INSTAB_STATUS_INVALID_ARGUMENT = 2,
  INSTAB_STATUS_UNSUPPORTED = 3,
  INSTAB_STATUS_NO_ROOT = 4,
  INSTAB_STATUS_NO_CONVERGENCE = 5,
  INSTAB_STATUS_MATCH_FAILURE = 6,
  INSTAB_STATUS_BUFFER_TOO_SMALL = 7,
  INSTAB_STATUS_INTERNAL = 8,
  INSTAB_STATUS_PANIC = 99,
} InstabStatus;

typedef enum InstabClass {
  INSTAB_CLASS_TYPE0 = 0,
  INSTAB_CLASS_TYPE_I0 = 1,
  INSTAB_CLASS_TYPE_I_PLUS = 2,
  INSTAB_CLASS_TYPE_I_MINUS = 3,
  INSTAB_CLASS_TYPE_II = 4,
  INSTAB_CLASS_PARALLEL = 5,
} InstabClass;

typedef enum InstabModel {
  INSTAB_MODEL_NAVIER_STOKES = 0,
  INSTAB_MODEL_SECOND_GRADE = 1,
  INSTAB_MODEL_NS_ALPHA = 2,
  INSTAB_MODEL_NS_VOIGT = 3,
} InstabModel;

/**
 * Opaque problem instance.
 */
typedef struct InstabProblem InstabProblem;

/**
 * Result of [`instab_find_root`].
 */
typedef struct InstabRoot {
  double lambda;
  double bracket_lo;
  double bracket_hi;
  double residual;
  size_t cf_depth;
} InstabRoot;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create a problem. `model` is an [`InstabModel`] value; `alpha` is ignored
 * for Navier–Stokes. `q` is replaced by its canonical representative.
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives a handle that must be
 * released with [`instab_problem_free`].
 */
enum InstabStatus instab_problem_new(int32_t model,
                                     int64_t px,
                                     int64_t py,
                                     int64_t qx,
                                     int64_t qy,
                                     double nu,
                                     double alpha,
                                     struct InstabProblem **out);

/**
 * # Safety
 * `p` must be null or a handle from [`instab_problem_new`] not yet freed.
 */
void instab_problem_free(struct InstabProblem *p);

/**
 * Use an explicit steady-state amplitude instead of the normalized one.
 *
 * # Safety
 * `p` must be a live handle.
 */
enum InstabStatus instab_problem_set_gamma(struct InstabProblem *p, double gamma);

/**
 * Replace the viscosity.
 *
 * # Safety
 * `p` must be a live handle.
 */
enum InstabStatus instab_problem_set_nu(struct InstabProblem *p, double nu);

/**
 * Classify the orbit of `q` under shifts by `p`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum InstabStatus instab_classify(int64_t px,
                                  int64_t py,
                                  int64_t qx,
                                  int64_t qy,
                                  enum InstabClass *out);

/**
 * Class of the problem's orbit.
 *
 * # Safety
 * `p` must be a live handle and `out` valid.
 */
enum InstabStatus instab_problem_class(const struct InstabProblem *p, enum InstabClass *out);

/**
 * Canonical representative `q̂` stored in the problem.
 *
 * # Safety
 * `p` must be a live handle; `qx`, `qy` valid.
 */
enum InstabStatus instab_problem_canonical_q(const struct InstabProblem *p,
                                             int64_t *qx,
                                             int64_t *qy);

/**
 * Dispersion function at `lambda` with tails evaluated to `tol`.
 *
 * # Safety
 * `p` must be a live handle and `out` valid.
 */
enum InstabStatus instab_dispersion_value(const struct InstabProblem *p,
                                          double lambda,
                                          double tol,
                                          double *out);

/**
 * Smallest positive root of the dispersion function. `lambda_cap <= 0`
 * selects the default scan range. Returns `NoRoot` if no sign change is found.
 *
 * # Safety
 * `p` must be a live handle and `out` valid.
 */
enum InstabStatus instab_find_root(const struct InstabProblem *p,
                                   double tol,
                                   double lambda_cap,
                                   struct InstabRoot *out);

/**
 * Critical viscosity estimate (the problem's own `nu` is ignored).
 *
 * # Safety
 * `p` must be a live handle and `out` valid.
 */
enum InstabStatus instab_nu0(const struct InstabProblem *p, double tol, double *out);

/**
 * Largest real part of the spectrum of the `(2·window+1)`-section.
 *
 * # Safety
 * `p` must be a live handle and `out` valid.
 */
enum InstabStatus instab_max_real_eig(const struct InstabProblem *p, size_t window, double *out);

/**
 * `det(I + K_λ)` on the `(2·window+1)`-section.
 *
 * # Safety
 * `p` must be a live handle and `out` valid.
 */
enum InstabStatus instab_det(const struct InstabProblem *p,
                             double lambda,
                             size_t window,
                             double *out);

/**
 * Eigenvector `w_{−window..=window}` for a root `lambda`, written to `buf`
 * (which must hold `2·window + 1` doubles). `residual` may be null.
 *
 * # Safety
 * `p` must be a live handle; `buf` must point to `len` writable doubles.
 */
enum InstabStatus instab_eigenvector(const struct InstabProblem *p,
                                     double lambda,
                                     double root_tol,
                                     size_t window,
                                     double *buf,
                                     size_t len,
                                     double *residual);

/**
 * Growth rate of the truncated dynamics from seeded random data.
 * `dt <= 0` selects the largest stable step.
 *
 * # Safety
 * `p` must be a live handle and `out` valid.
 */
enum InstabStatus instab_growth_rate(const struct InstabProblem *p,
                                     size_t window,
                                     double t_final,
                                     double dt,
                                     uint64_t seed,
                                     double *out);

/**
 * Message for the last failure on this thread (empty if none). The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *instab_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *instab_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INSTAB_H */
