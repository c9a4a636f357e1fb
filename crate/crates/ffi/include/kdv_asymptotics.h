#ifndef KDV_ASYMPTOTICS_H
#define KDV_ASYMPTOTICS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
enum KdvaStatus
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  KDVA_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  KDVA_STATUS_NULL_POINTER = 1,
  /**
   * The configuration is not valid JSON or not valid UTF-8.
   */
  KDVA_STATUS_PARSE = 2,
  /**
   * The configuration or a request violates an invariant.
   */
  KDVA_STATUS_VALIDATION = 3,
  /**
   * The computation failed.
   */
  KDVA_STATUS_NUMERICAL = 4,
  /**
   * An output buffer has the wrong length.
   */
  KDVA_STATUS_BUFFER = 5,
  /**
   * A panic was caught inside the library.
   */
  KDVA_STATUS_PANIC = 6,
};
#ifndef __cplusplus
typedef int32_t KdvaStatus;
#endif // __cplusplus

/**
 * Opaque experiment handle.
 */
typedef struct KdvaExperiment KdvaExperiment;

/**
 * Effective constants of the parameter set.
 */
typedef struct KdvaEffectiveParams {
  /**
   * Squared effective speed.
   */
  double c2;
  double c;
  /**
   * Dispersion coefficient of the KdV equations.
   */
  double dispersion;
  /**
   * Flux coefficient of the KdV equations.
   */
  double gamma_h;
} KdvaEffectiveParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *kdva_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *kdva_version(void);

/**
 * Parses and validates `config_json` and stores a new handle in `*out`.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string and `out` a valid pointer.
 */
KdvaStatus kdva_experiment_new(const char *config_json, struct KdvaExperiment **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `handle` must come from [`kdva_experiment_new`] and not be used afterwards.
 */
void kdva_experiment_free(struct KdvaExperiment *handle);

/**
 * # Safety
 * `handle` must be a live handle and `out` a valid pointer.
 */
KdvaStatus kdva_effective_params(const struct KdvaExperiment *handle,
                                 struct KdvaEffectiveParams *out);

/**
 * Number of nodes of the spatial grid.
 *
 * # Safety
 * `handle` must be a live handle and `out` a valid pointer.
 */
KdvaStatus kdva_grid_len(const struct KdvaExperiment *handle, uintptr_t *out);

/**
 * Node positions of the spatial grid.
 *
 * # Safety
 * `x` must point to `len` writable doubles.
 */
KdvaStatus kdva_grid_nodes(const struct KdvaExperiment *handle, double *x, uintptr_t len);

/**
 * Full solution at `t_end` for the configured `epsilon`.
 *
 * # Safety
 * `u` and `v` must each point to `len` writable doubles.
 */
KdvaStatus kdva_simulate_full(const struct KdvaExperiment *handle,
                              double *u,
                              double *v,
                              uintptr_t len);

/**
 * Regular asymptotics `(u0_bar, v0_bar)` at time `t` (smooth data only).
 *
 * # Safety
 * `u` and `v` must each point to `len` writable doubles.
 */
KdvaStatus kdva_simulate_regular(const struct KdvaExperiment *handle,
                                 double t,
                                 double *u,
                                 double *v,
                                 uintptr_t len);

/**
 * Composed KdV asymptotics at `t_end` for the configured `epsilon`
 * (burst data only).
 *
 * # Safety
 * `u` and `v` must each point to `len` writable doubles.
 */
KdvaStatus kdva_simulate_burst(const struct KdvaExperiment *handle,
                               double *u,
                               double *v,
                               uintptr_t len);

/**
 * Runs the convergence sweep over `epsilon_list` and stores a JSON report
 * in `*out`, to be released with [`kdva_string_free`]. Undefined numbers
 * (such as the fitted order of a one-row sweep) are `null`.
 *
 * # Safety
 * `handle` must be a live handle and `out` a valid pointer.
 */
KdvaStatus kdva_sweep_json(const struct KdvaExperiment *handle, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void kdva_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KDV_ASYMPTOTICS_H */
