#ifndef SQZTOMO_H
#define SQZTOMO_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SqzStatus {
  SQZ_OK = 0,
  SQZ_NULL_POINTER = 1,
  SQZ_INVALID_ARGUMENT = 2,
  SQZ_TRUNCATION = 3,
  SQZ_NUMERICAL = 4,
  SQZ_BUFFER_TOO_SMALL = 5,
  SQZ_PANIC = 6,
} SqzStatus;

typedef enum SqzRoute {
  SQZ_ROUTE_ORACLE = 0,
  SQZ_ROUTE_CLOSED_FORM = 1,
  SQZ_ROUTE_KERNEL_DENSITY = 2,
  SQZ_ROUTE_KERNEL_WIGNER = 3,
  SQZ_ROUTE_KERNEL_SYMPLECTIC = 4,
} SqzRoute;

/**
 * A parsed state description.
 */
typedef struct SqzState SqzState;

/**
 * A computed squeeze tomogram, frames ordered theta-major.
 */
typedef struct SqzTomogram SqzTomogram;

/**
 * Gaussian moments of the damped oscillator; `sigma_*` are variances.
 */
typedef struct SqzMoments {
  double t;
  double mean_q;
  double mean_p;
  double sigma_q;
  double sigma_p;
  double sigma_pq;
} SqzMoments;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into this library on the same thread.
 */
const char *sqz_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sqz_version(void);

/**
 * Parses `vacuum`, `fock:M`, `coherent:A`, `cat:A:+`, `cat:A:-`,
 * `thermal:T` or the JSON form into a new state handle.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SqzStatus sqz_state_parse(const char *spec, struct SqzState **out);

/**
 * # Safety
 * `state` must come from [`sqz_state_parse`] or be NULL.
 */
void sqz_state_free(struct SqzState *state);

/**
 * Squeeze tomogram on the grid `thetas x lambdas` (theta-major), `n <= n_max`.
 * `cutoff` is the Fock dimension for the oracle and kernel routes.
 *
 * # Safety
 * Array arguments must point to the stated number of elements; `out` must
 * be a valid pointer.
 */
enum SqzStatus sqz_tomogram_compute(const struct SqzState *state,
                                    enum SqzRoute route,
                                    const double *lambdas,
                                    size_t n_lambdas,
                                    const double *thetas,
                                    size_t n_thetas,
                                    size_t n_max,
                                    size_t cutoff,
                                    struct SqzTomogram **out);

/**
 * # Safety
 * `tomogram` must come from [`sqz_tomogram_compute`] or be NULL.
 */
void sqz_tomogram_free(struct SqzTomogram *tomogram);

/**
 * Number of frames; 0 for NULL.
 *
 * # Safety
 * `tomogram` must be a live handle or NULL.
 */
size_t sqz_tomogram_frames(const struct SqzTomogram *tomogram);

/**
 * `n_max`; 0 for NULL.
 *
 * # Safety
 * `tomogram` must be a live handle or NULL.
 */
size_t sqz_tomogram_n_max(const struct SqzTomogram *tomogram);

/**
 * Copies `W[f][n]` row-major into `out`, which must hold
 * `frames * (n_max + 1)` values.
 *
 * # Safety
 * `tomogram` must be a live handle and `out` must have room for `len` values.
 */
enum SqzStatus sqz_tomogram_values(const struct SqzTomogram *tomogram, double *out, size_t len);

/**
 * Copies the per-frame tail mass into `out` (length at least `frames`).
 *
 * # Safety
 * `tomogram` must be a live handle and `out` must have room for `len` values.
 */
enum SqzStatus sqz_tomogram_tail_mass(const struct SqzTomogram *tomogram, double *out, size_t len);

/**
 * Optical tomogram `w(x, theta)` of the state truncated to `cutoff` levels.
 *
 * # Safety
 * `state` must be a live handle and `out` a valid pointer.
 */
enum SqzStatus sqz_optical_tomogram(const struct SqzState *state,
                                    size_t cutoff,
                                    double x,
                                    double theta,
                                    double *out);

/**
 * Moments of the damped-oscillator state with amplitude `alpha` at time `t`,
 * `0 <= gamma < 1`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SqzStatus sqz_kanai_moments(double gamma,
                                 double alpha_re,
                                 double alpha_im,
                                 double t,
                                 struct SqzMoments *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SQZTOMO_H */
