#ifndef VLOCK_H
#define VLOCK_H

/* Generated by cbindgen from crates/ffi/src; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum VlockStatus {
  VLOCK_STATUS_OK = 0,
  VLOCK_STATUS_NULL_POINTER = 1,
  VLOCK_STATUS_INVALID_PARAMETER = 2,
  VLOCK_STATUS_WINDOW_TOO_SMALL = 3,
  VLOCK_STATUS_BELOW_SPREADING_SPEED = 4,
  VLOCK_STATUS_DEGENERATE = 5,
  VLOCK_STATUS_ROOT_SOLVE = 6,
  VLOCK_STATUS_NUMERICAL = 7,
  VLOCK_STATUS_MONOTONICITY = 8,
  VLOCK_STATUS_NOT_POSITIVE = 9,
  VLOCK_STATUS_SIMULATION = 10,
  VLOCK_STATUS_CONFIG = 11,
  VLOCK_STATUS_IO = 12,
  VLOCK_STATUS_OUT_OF_RANGE = 13,
  VLOCK_STATUS_PANIC = 14,
} VlockStatus;

/**
 * Opaque locked-front handle.
 */
typedef struct VlockFront VlockFront;

typedef struct VlockSimConfig {
  size_t lattice_size;
  uint64_t transient_generations;
  uint64_t measure_generations;
  size_t capacity_seed_width;
  size_t shift_trigger_site;
} VlockSimConfig;

typedef struct VlockSpeedMeasurement {
  double measured_speed;
  uint64_t shift_count;
  uint64_t generations;
} VlockSpeedMeasurement;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *vlock_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *vlock_version(void);

/**
 * Linear spreading speed and its decay rate.
 *
 * # Safety
 * Out-pointers must be null or valid for writes.
 */
enum VlockStatus vlock_linear_spreading_speed(double r,
                                              double m,
                                              double *out_s_lin,
                                              double *out_gamma_lin);

/**
 * Strong and weak decay rates travelling at `p/q`.
 *
 * # Safety
 * Out-pointers must be valid for writes.
 */
enum VlockStatus vlock_decay_rates(double r,
                                   double m,
                                   uint32_t p,
                                   uint32_t q,
                                   double *out_gamma_s,
                                   double *out_gamma_w);

/**
 * Migration rate at which the spreading speed reaches `p/q`.
 *
 * `out_saturated` may be null; it is set when no crossing exists below the cap.
 *
 * # Safety
 * Out-pointers must be null or valid for writes.
 */
enum VlockStatus vlock_m_star(double r, uint32_t p, uint32_t q, double *out_m, bool *out_saturated);

/**
 * Threshold band `(c_min, c_max)` of the `p/q` locked front.
 *
 * # Safety
 * Out-pointers must be valid for writes.
 */
enum VlockStatus vlock_c_bounds(double r,
                                double m,
                                uint32_t p,
                                uint32_t q,
                                double *out_c_min,
                                double *out_c_max);

/**
 * `1 - λ_max` in the space weighted by the geometric mean of the decay rates.
 *
 * # Safety
 * `out_margin` must be valid for writes.
 */
enum VlockStatus vlock_stability_margin(double r,
                                        double m,
                                        uint32_t p,
                                        uint32_t q,
                                        double *out_margin);

/**
 * Build the `p/q` front at `(r, m)`; free it with [`vlock_front_free`].
 *
 * # Safety
 * `out_front` must be valid for writes. It is set to null on failure.
 */
enum VlockStatus vlock_front_build(double r,
                                   double m,
                                   uint32_t p,
                                   uint32_t q,
                                   struct VlockFront **out_front);

/**
 * Release a front. Null is ignored.
 *
 * # Safety
 * `front` must be null or a handle from [`vlock_front_build`] not yet freed.
 */
void vlock_front_free(struct VlockFront *front);

/**
 * Number of modes `q - p`.
 *
 * # Safety
 * `front` must be a live handle; `out_count` valid for writes.
 */
enum VlockStatus vlock_front_mode_count(const struct VlockFront *front, uint32_t *out_count);

/**
 * Root `γ_j` and weight `k_j` of mode `j` (0-based; mode 0 is the strong real root).
 *
 * # Safety
 * `front` must be a live handle; out-pointers null or valid for writes.
 */
enum VlockStatus vlock_front_mode(const struct VlockFront *front,
                                  uint32_t j,
                                  double *out_gamma_re,
                                  double *out_gamma_im,
                                  double *out_k_re,
                                  double *out_k_im);

/**
 * Profile value `φ_i` at any site.
 *
 * # Safety
 * `front` must be a live handle; `out_phi` valid for writes.
 */
enum VlockStatus vlock_front_phi(const struct VlockFront *front, int64_t i, double *out_phi);

/**
 * `Γ_n`, the intermediate-generation value `n/q` sites into the front.
 *
 * # Safety
 * `front` must be a live handle; `out_value` valid for writes.
 */
enum VlockStatus vlock_front_gamma_sum(const struct VlockFront *front,
                                       uint32_t n,
                                       double *out_value);

/**
 * Sup-norm distance between the stored window and its image under the locked map at threshold `c`.
 *
 * # Safety
 * `front` must be a live handle; `out_residual` valid for writes.
 */
enum VlockStatus vlock_front_residual(const struct VlockFront *front,
                                      double c,
                                      double *out_residual);

/**
 * Positivity check of the whole profile.
 *
 * `out_i_star` receives the site from which the leading mode dominates, or 0
 * when the tail could not be certified.
 *
 * # Safety
 * `front` must be a live handle; out-pointers null or valid for writes.
 */
enum VlockStatus vlock_front_positivity(const struct VlockFront *front,
                                        bool *out_positive,
                                        uint64_t *out_i_star);

struct VlockSimConfig vlock_sim_config_default(void);

/**
 * Shifting-window simulation. A null `config` uses the defaults.
 *
 * # Safety
 * `config` must be null or valid for reads; `out` valid for writes.
 */
enum VlockStatus vlock_simulate_speed(double r,
                                      double m,
                                      double c,
                                      const struct VlockSimConfig *config,
                                      struct VlockSpeedMeasurement *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VLOCK_H */
