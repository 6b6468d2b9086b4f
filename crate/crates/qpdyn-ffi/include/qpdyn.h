#ifndef QPDYN_H
#define QPDYN_H

/* Generated by cbindgen from the qpdyn-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every FFI call.
typedef enum QpdynStatus {
  // Success.
  QPDYN_STATUS_OK = 0,
  // A required pointer argument was null.
  QPDYN_STATUS_NULL_POINTER = 1,
  // Arguments or data violated a documented precondition.
  QPDYN_STATUS_INVALID_INPUT = 2,
  // An iterative routine stopped without meeting its tolerance.
  QPDYN_STATUS_NON_CONVERGENCE = 3,
  // The diffusion update diverged.
  QPDYN_STATUS_INSTABILITY = 4,
  // Adaptive quadrature could not reach its tolerance.
  QPDYN_STATUS_QUADRATURE_FAILURE = 5,
  // Unexpected internal failure (a bug; please report it).
  QPDYN_STATUS_INTERNAL = 6,
} QpdynStatus;

// Propagation channel selector for `qpdyn_transit_time`.
typedef enum QpdynMechanism {
  // Electromagnetic propagation at the on-chip photon speed.
  QPDYN_MECHANISM_PHOTON = 0,
  // Phonons random-walking through the substrate.
  QPDYN_MECHANISM_PHONON_MEDIATED = 1,
  // Quasiparticle diffusion along the film.
  QPDYN_MECHANISM_DIRECT_DIFFUSION = 2,
} QpdynMechanism;

// Physical constants of the device (opaque).
typedef struct QpdynConstants QpdynConstants;

// Finished diffusion run: snapshots and probe series (opaque).
typedef struct QpdynDiffusionResult QpdynDiffusionResult;

// Diffusion scenario under construction (opaque).
typedef struct QpdynDiffusionScenario QpdynDiffusionScenario;

// Chip geometry and material speeds (opaque).
typedef struct QpdynGeometry QpdynGeometry;

// Phonon-burst model parameters (opaque). Parameters are addressed
// by fit-order index: 0 recombination_rate (1/s), 1
// qubit_trapping_rate (1/s), 2 propagation_delay (s), 3
// transfer_fraction, 4 sfq_generation_rate (1/s), 5
// drive_duration (s).
typedef struct QpdynPhononParams QpdynPhononParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the last error message into `buf` (NUL-terminated, truncated
// to `cap`). Returns the full length the message needs, including
// the terminator; call with a null `buf` or `cap` 0 to size a buffer.
size_t qpdyn_last_error_message(char *buf, size_t cap);

// Allocate the default device constants.
enum QpdynStatus qpdyn_constants_new(struct QpdynConstants **out);

// Release a constants handle; null is allowed.
void qpdyn_constants_free(struct QpdynConstants *handle);

// Density-to-rate conversion factor C in Γ = Γ0 + C·x_qp, 1/s.
enum QpdynStatus qpdyn_compute_c(const struct QpdynConstants *constants, double *out);

// Quasiparticle density extracted from a relaxation time `t1_s`
// against the baseline rate `gamma0_per_s`.
enum QpdynStatus qpdyn_gamma_to_xqp(const struct QpdynConstants *constants,
                                    double t1_s,
                                    double gamma0_per_s,
                                    double *out);

// DC voltage of a converter locked to `drive_freq_hz`: Φ0·f.
enum QpdynStatus qpdyn_expected_sfq_voltage(const struct QpdynConstants *constants,
                                            double drive_freq_hz,
                                            double *out);

// Allocate the default chip geometry.
enum QpdynStatus qpdyn_geometry_new(struct QpdynGeometry **out);

// Release a geometry handle; null is allowed.
void qpdyn_geometry_free(struct QpdynGeometry *handle);

// Converter-to-qubit transit time for one propagation mechanism, s.
enum QpdynStatus qpdyn_transit_time(const struct QpdynGeometry *geometry,
                                    enum QpdynMechanism mechanism,
                                    double *out_seconds);

// Allocate phonon model parameters at the library defaults.
enum QpdynStatus qpdyn_phonon_params_new(struct QpdynPhononParams **out);

// Release a phonon parameter handle; null is allowed.
void qpdyn_phonon_params_free(struct QpdynPhononParams *handle);

// Read one parameter by fit-order index (see `QpdynPhononParams`).
enum QpdynStatus qpdyn_phonon_params_get(const struct QpdynPhononParams *params,
                                         uint32_t index,
                                         double *out);

// Set one parameter by fit-order index (see `QpdynPhononParams`).
// The new value set is validated together with the others.
enum QpdynStatus qpdyn_phonon_params_set(struct QpdynPhononParams *params,
                                         uint32_t index,
                                         double value);

// Evaluate the phonon-burst qubit density on a strictly increasing
// time grid. `out_values` must hold `len` doubles.
enum QpdynStatus qpdyn_phonon_curve(const struct QpdynPhononParams *params,
                                    const double *times,
                                    size_t len,
                                    double *out_values);

// Backward window average of a sampled trajectory at its own sample
// times. `exponential_weighting` 0 means uniform weights; nonzero
// selects exp(−(t−t0)/t_avg). Fails when a window would start before
// the first sample.
enum QpdynStatus qpdyn_window_average(const double *times,
                                      const double *values,
                                      size_t len,
                                      double t_avg_s,
                                      int32_t exponential_weighting,
                                      double *out_values);

// Allocate the default diffusion scenario (reference chip, 500×250
// grid, converter drive on for 25 µs).
enum QpdynStatus qpdyn_diffusion_scenario_new(struct QpdynDiffusionScenario **out);

// Release a scenario handle; null is allowed.
void qpdyn_diffusion_scenario_free(struct QpdynDiffusionScenario *handle);

// Override the grid resolution. Validation happens at run time.
enum QpdynStatus qpdyn_diffusion_scenario_set_grid(struct QpdynDiffusionScenario *scenario,
                                                   size_t nx,
                                                   size_t ny);

// Override the linear trapping rate, 1/s.
enum QpdynStatus qpdyn_diffusion_scenario_set_trapping_rate(struct QpdynDiffusionScenario *scenario,
                                                            double rate_per_s);

// Override the quadratic recombination rate, 1/s.
enum QpdynStatus qpdyn_diffusion_scenario_set_recombination_rate(struct QpdynDiffusionScenario *scenario,
                                                                 double rate_per_s);

// Override the injection rate into the drive region, 1/s.
enum QpdynStatus qpdyn_diffusion_scenario_set_injection_rate(struct QpdynDiffusionScenario *scenario,
                                                             double rate_per_s);

// Override the end of the simulated window, s.
enum QpdynStatus qpdyn_diffusion_scenario_set_simulation_end(struct QpdynDiffusionScenario *scenario,
                                                             double end_s);

// Largest stable explicit time step for the scenario, s.
enum QpdynStatus qpdyn_diffusion_stable_dt(const struct QpdynDiffusionScenario *scenario,
                                           double *out_seconds);

// Run the scenario to completion and hand back a result handle.
enum QpdynStatus qpdyn_diffusion_run(const struct QpdynDiffusionScenario *scenario,
                                     struct QpdynDiffusionResult **out);

// Release a result handle; null is allowed.
void qpdyn_diffusion_result_free(struct QpdynDiffusionResult *handle);

// Number of probe series in a result.
enum QpdynStatus qpdyn_diffusion_probe_count(const struct QpdynDiffusionResult *result,
                                             size_t *out);

// Number of samples in probe series `probe`.
enum QpdynStatus qpdyn_diffusion_probe_length(const struct QpdynDiffusionResult *result,
                                              size_t probe,
                                              size_t *out);

// Copy probe series `probe` into caller buffers sized by
// `qpdyn_diffusion_probe_length`. Either output may be null to
// skip that column.
enum QpdynStatus qpdyn_diffusion_probe_series(const struct QpdynDiffusionResult *result,
                                              size_t probe,
                                              double *out_times,
                                              double *out_values);

// Time and value of the maximum of probe series `probe`.
enum QpdynStatus qpdyn_diffusion_probe_peak(const struct QpdynDiffusionResult *result,
                                            size_t probe,
                                            double *out_time,
                                            double *out_value);

// Number of captured field snapshots in a result.
enum QpdynStatus qpdyn_diffusion_snapshot_count(const struct QpdynDiffusionResult *result,
                                                size_t *out);

// Shape and capture time of snapshot `snapshot`. Any output pointer
// may be null to skip it.
enum QpdynStatus qpdyn_diffusion_snapshot_info(const struct QpdynDiffusionResult *result,
                                               size_t snapshot,
                                               double *out_time,
                                               size_t *out_nx,
                                               size_t *out_ny,
                                               double *out_cell_size);

// Copy snapshot `snapshot` into a caller buffer of nx·ny doubles,
// row-major with x fastest.
enum QpdynStatus qpdyn_diffusion_snapshot_values(const struct QpdynDiffusionResult *result,
                                                 size_t snapshot,
                                                 double *out_values);

// Calibrate the phonon model against measured densities.
//
// `times`/`x_qp` are `len` samples; `sigma` (nullable) gives 1-σ
// uncertainties for 1/σ² weighting. `fixed_mask` (nullable) holds 6
// bytes, nonzero meaning the parameter stays at its value in
// `initial`; the default frees everything except the recombination
// rate. `seed` (nullable) overrides the restart-jitter stream; the
// same seed and inputs always reproduce the same result.
// `out_sigma` (nullable) receives 6 per-parameter uncertainties
// (zero for fixed or unavailable). `out_converged` receives 1 when
// the optimizer met its tolerance. Box bounds are a factor 10³
// around `initial`.
enum QpdynStatus qpdyn_fit_phonon_model(const struct QpdynPhononParams *initial,
                                        const double *times,
                                        const double *x_qp,
                                        const double *sigma,
                                        size_t len,
                                        const uint8_t *fixed_mask,
                                        const uint64_t *seed,
                                        struct QpdynPhononParams **out_params,
                                        double *out_sigma,
                                        int32_t *out_converged);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QPDYN_H */
