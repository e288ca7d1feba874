#ifndef QMPEMBA_H
#define QMPEMBA_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Doubles per density matrix.
 */
#define QM_STATE_LEN 32

/**
 * Modes of the population generator.
 */
#define QM_POPULATION_MODES 4

typedef enum QmStatus {
  QM_STATUS_OK = 0,
  QM_STATUS_NULL_POINTER = 1,
  QM_STATUS_USAGE = 2,
  QM_STATUS_DOMAIN = 3,
  QM_STATUS_CONFIG = 4,
  QM_STATUS_NUMERICAL = 5,
  QM_STATUS_DEGENERATE = 6,
  QM_STATUS_IO = 7,
  QM_STATUS_PANIC = 8,
} QmStatus;

typedef enum QmCoupling {
  QM_COUPLING_ISING = 0,
  QM_COUPLING_FULL_SCALAR = 1,
} QmCoupling;

typedef enum QmMetric {
  QM_METRIC_TRACE_DISTANCE = 0,
  QM_METRIC_RELATIVE_ENTROPY = 1,
} QmMetric;

typedef enum QmClassification {
  QM_CLASSIFICATION_NONE = 0,
  QM_CLASSIFICATION_WEAK = 1,
  QM_CLASSIFICATION_STRONG = 2,
  QM_CLASSIFICATION_GENUINE = 3,
} QmClassification;

/**
 * Relaxation generator together with the parameters it was built from.
 */
typedef struct QmLiouvillian QmLiouvillian;

/**
 * States on a time grid.
 */
typedef struct QmTrajectory QmTrajectory;

/**
 * Coherent parameters; frequencies in rad/s, J in Hz.
 */
typedef struct QmSystemParams {
  double omega0;
  double delta_offset;
  double j_coupling_hz;
  double epsilon;
} QmSystemParams;

/**
 * Dipolar bath; b in rad/s, τc in s.
 */
typedef struct QmBathParams {
  double b_dipolar;
  double tau_c;
} QmBathParams;

/**
 * Result of a far/near comparison.
 */
typedef struct QmCrossing {
  /**
   * Nonzero when a persistent crossing exists.
   */
  int32_t found;
  /**
   * First crossing time; NaN when `found` is zero.
   */
  double time;
  /**
   * Sign changes of the gap on the grid.
   */
  uintptr_t count;
  /**
   * `metric_far(0) − metric_near(0)`.
   */
  double initial_gap;
  enum QmClassification classification;
} QmCrossing;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *qm_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qm_version(void);

/**
 * Parameters of the reference experiment.
 *
 * # Safety
 * Pointers must be null or valid for writes.
 */
enum QmStatus qm_experiment_params(struct QmSystemParams *system, struct QmBathParams *bath);

/**
 * Build the dipolar Liouvillian. With `dimensionless` nonzero all rates are
 * divided by K0 so that time is measured in 1/K0.
 *
 * # Safety
 * Pointers must be null or valid; `*out` receives a handle to release with
 * [`qm_liouvillian_free`].
 */
enum QmStatus qm_liouvillian_new(const struct QmSystemParams *system,
                                 const struct QmBathParams *bath,
                                 enum QmCoupling coupling,
                                 int32_t dimensionless,
                                 struct QmLiouvillian **out);

/**
 * # Safety
 * `l` must be null or a handle from [`qm_liouvillian_new`] not yet freed.
 */
void qm_liouvillian_free(struct QmLiouvillian *l);

/**
 * Eigenvalues of the population generator, sorted by decreasing real
 * part, into `re`/`im` arrays of length [`QM_POPULATION_MODES`].
 *
 * # Safety
 * Pointers must be null or valid for the stated lengths.
 */
enum QmStatus qm_population_eigenvalues(const struct QmLiouvillian *l, double *re, double *im);

/**
 * Thermal reference state `(𝟙 + 2εΣz)/4`.
 *
 * # Safety
 * `rho` must hold [`QM_STATE_LEN`] doubles.
 */
enum QmStatus qm_thermal_state(const struct QmLiouvillian *l, double *rho);

/**
 * Far state `𝟙/4 − εΣz/2`.
 *
 * # Safety
 * `rho` must hold [`QM_STATE_LEN`] doubles.
 */
enum QmStatus qm_far_state(const struct QmLiouvillian *l, double *rho);

/**
 * Near state prepared with pulse angle `theta` (radians, in (0, π/2)) and
 * dephased by a field gradient.
 *
 * # Safety
 * `rho` must hold [`QM_STATE_LEN`] doubles.
 */
enum QmStatus qm_near_state(const struct QmLiouvillian *l, double theta, double *rho);

/**
 * Near state `𝟙/4 + ε(I1z − I2z)/2` used for relative-entropy crossings.
 *
 * # Safety
 * `rho` must hold [`QM_STATE_LEN`] doubles.
 */
enum QmStatus qm_near_state_genuine(const struct QmLiouvillian *l, double *rho);

/**
 * Propagate `rho0` to every time in `times` (nondecreasing, starting at or
 * after zero).
 *
 * # Safety
 * `rho0` holds [`QM_STATE_LEN`] doubles, `times` holds `n` doubles; `*out`
 * receives a handle to release with [`qm_trajectory_free`].
 */
enum QmStatus qm_propagate(const struct QmLiouvillian *l,
                           const double *rho0,
                           const double *times,
                           uintptr_t n,
                           struct QmTrajectory **out);

/**
 * # Safety
 * `t` must be null or a handle from [`qm_propagate`] not yet freed.
 */
void qm_trajectory_free(struct QmTrajectory *t);

/**
 * Number of snapshots; zero for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
uintptr_t qm_trajectory_len(const struct QmTrajectory *t);

/**
 * Snapshot `index` and its time.
 *
 * # Safety
 * `rho` must hold [`QM_STATE_LEN`] doubles; `time` may be null.
 */
enum QmStatus qm_trajectory_state(const struct QmTrajectory *t,
                                  uintptr_t index,
                                  double *time,
                                  double *rho);

/**
 * `metric(rho, sigma)`.
 *
 * # Safety
 * `rho` and `sigma` hold [`QM_STATE_LEN`] doubles; `out` is valid.
 */
enum QmStatus qm_metric(enum QmMetric metric, const double *rho, const double *sigma, double *out);

/**
 * Propagate the two states over `times`, locate where the far state's
 * distance to the thermal state drops below the near state's, and classify
 * the crossing.
 *
 * # Safety
 * `far` and `near` hold [`QM_STATE_LEN`] doubles, `times` holds `n`
 * doubles; `out` is valid.
 */
enum QmStatus qm_mpemba_crossing(const struct QmLiouvillian *l,
                                 enum QmMetric metric,
                                 const double *far,
                                 const double *near,
                                 const double *times,
                                 uintptr_t n,
                                 struct QmCrossing *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QMPEMBA_H */
