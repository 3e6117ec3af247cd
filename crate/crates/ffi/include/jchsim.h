#ifndef JCHSIM_H
#define JCHSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum JchsimStatus {
  JCHSIM_STATUS_OK = 0,
  JCHSIM_STATUS_NULL_POINTER = 1,
  JCHSIM_STATUS_INVALID_ARGUMENT = 2,
  JCHSIM_STATUS_CONFIG = 3,
  JCHSIM_STATUS_IO = 4,
  JCHSIM_STATUS_NUMERICAL = 5,
  JCHSIM_STATUS_LOW_FIDELITY = 6,
  JCHSIM_STATUS_OUT_OF_RANGE = 7,
  JCHSIM_STATUS_PANIC = 8,
} JchsimStatus;

typedef enum JchsimMode {
  JCHSIM_MODE_CLOSED = 0,
  JCHSIM_MODE_OPEN = 1,
} JchsimMode;

/**
 * Run configuration.
 */
typedef struct JchsimConfig JchsimConfig;

/**
 * Resonances detected on a sweep.
 */
typedef struct JchsimReport JchsimReport;

/**
 * Finished detuning sweep.
 */
typedef struct JchsimSweep JchsimSweep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last call on this thread, empty after success. Valid until
 * the next call.
 */
const char *jchsim_last_error(void);

/**
 * Library version, static.
 */
const char *jchsim_version(void);

/**
 * Time-averaged dimer variance and linear entropy.
 *
 * # Safety
 * `var` and `entropy` must be valid for writes.
 */
enum JchsimStatus jchsim_dimer_analytic(double omega,
                                        double g,
                                        double delta_over_g,
                                        double j,
                                        double *var,
                                        double *entropy);

/**
 * Default configuration of `mode`.
 *
 * # Safety
 * `cfg` must be valid for writes.
 */
enum JchsimStatus jchsim_config_default(enum JchsimMode mode, struct JchsimConfig **cfg);

/**
 * Configuration from TOML text; missing keys take the defaults.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `cfg` valid for writes.
 */
enum JchsimStatus jchsim_config_from_toml(const char *toml, struct JchsimConfig **cfg);

/**
 * Sets `key` (dotted, e.g. `physics.g`) to a TOML literal. A bare word is a string.
 *
 * # Safety
 * `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
 */
enum JchsimStatus jchsim_config_set(struct JchsimConfig *cfg, const char *key, const char *value);

/**
 * # Safety
 * `cfg` must be null or a handle not yet freed.
 */
void jchsim_config_free(struct JchsimConfig *cfg);

/**
 * Runs the sweep described by `cfg`. Failed grid points are recorded, not fatal.
 *
 * # Safety
 * `cfg` must be a live handle and `result` valid for writes.
 */
enum JchsimStatus jchsim_sweep_run(const struct JchsimConfig *cfg, struct JchsimSweep **result);

/**
 * Grid points and site pairs `(0, j)` of a sweep.
 *
 * # Safety
 * `sweep` must be a live handle; the outputs valid for writes.
 */
enum JchsimStatus jchsim_sweep_shape(const struct JchsimSweep *sweep,
                                     size_t *points,
                                     size_t *pairs);

/**
 * Row `index`: detuning, analytic dimer variance, and `|C_{0j}|` and
 * `|C_{0j}|/Var` for each pair. `correlations` and `ratios` hold `capacity`
 * entries each and may be null. `failed` is set to 1 for a failed point.
 *
 * # Safety
 * `sweep` must be a live handle; non-null pointers valid for the stated sizes.
 */
enum JchsimStatus jchsim_sweep_row(const struct JchsimSweep *sweep,
                                   size_t index,
                                   double *delta_over_g,
                                   double *var_dimer,
                                   double *correlations,
                                   double *ratios,
                                   size_t capacity,
                                   int32_t *failed);

/**
 * Writes the sweep as CSV.
 *
 * # Safety
 * `sweep` must be a live handle and `path` a NUL-terminated string.
 */
enum JchsimStatus jchsim_sweep_write_csv(const struct JchsimSweep *sweep, const char *path);

/**
 * # Safety
 * `sweep` must be null or a handle not yet freed.
 */
void jchsim_sweep_free(struct JchsimSweep *sweep);

/**
 * Resonances of the ratio curves of `sweep`.
 *
 * # Safety
 * `sweep` must be a live handle and `report` valid for writes.
 */
enum JchsimStatus jchsim_detect(const struct JchsimSweep *sweep,
                                double prominence_fraction,
                                double anti_resonance_tolerance,
                                struct JchsimReport **report);

/**
 * Number of resonances and anti-resonances.
 *
 * # Safety
 * `report` must be a live handle; the outputs valid for writes.
 */
enum JchsimStatus jchsim_report_counts(const struct JchsimReport *report,
                                       size_t *resonances,
                                       size_t *anti_resonances);

/**
 * Resonance `index`: pair index (0 for `ij`, 1 for `ik`, ...), refined and
 * grid positions, prominence.
 *
 * # Safety
 * `report` must be a live handle; the outputs valid for writes.
 */
enum JchsimStatus jchsim_report_resonance(const struct JchsimReport *report,
                                          size_t index,
                                          size_t *pair,
                                          double *position,
                                          double *grid_position,
                                          double *prominence);

/**
 * Position of anti-resonance `index`.
 *
 * # Safety
 * `report` must be a live handle; `position` valid for writes.
 */
enum JchsimStatus jchsim_report_anti_resonance(const struct JchsimReport *report,
                                               size_t index,
                                               double *position);

/**
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void jchsim_report_free(struct JchsimReport *report);

/**
 * Ancilla preparation at `physics.delta_over_g` with the settings of `cfg`.
 * A result below the fidelity floor returns `LowFidelity`.
 *
 * # Safety
 * `cfg` must be a live handle; the outputs valid for writes.
 */
enum JchsimStatus jchsim_init_protocol(const struct JchsimConfig *cfg,
                                       double *fidelity,
                                       double *upper_leakage);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JCHSIM_H */
