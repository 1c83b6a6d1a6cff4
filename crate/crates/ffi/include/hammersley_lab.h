#ifndef HAMMERSLEY_LAB_H
#define HAMMERSLEY_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum HlStatus {
  HL_STATUS_OK = 0,
  HL_STATUS_NULL_POINTER = 1,
  HL_STATUS_INVALID_ARGUMENT = 2,
  HL_STATUS_DOMAIN = 3,
  HL_STATUS_LABEL_OUT_OF_RANGE = 4,
  HL_STATUS_WINDOW_EXHAUSTED = 5,
  HL_STATUS_PANIC = 6,
} HlStatus;

/**
 * Lazily realized Poisson field for one seed.
 */
typedef struct HlPointStore HlPointStore;

/**
 * Potential `V0` (antiderivative of a piecewise-linear density, `V0(0) = 0`).
 */
typedef struct HlPotential HlPotential;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *hl_last_error_message(void);

/**
 * Creates the Poisson field for `seed`.
 *
 * # Safety
 * `out_store` must be valid for writes.
 */
enum HlStatus hl_point_store_new(uint64_t seed, struct HlPointStore **out_store);

/**
 * Releases a store; NULL is ignored.
 *
 * # Safety
 * `store` must come from [`hl_point_store_new`] and not be used afterwards.
 */
void hl_point_store_free(struct HlPointStore *store);

/**
 * Longest strictly increasing sequence among `len` points `(xs[i], ts[i])`.
 *
 * # Safety
 * `xs` and `ts` must hold `len` values; `out_length` must be writable.
 */
enum HlStatus hl_lis_length(const double *xs, const double *ts, size_t len, size_t *out_length);

/**
 * Longest increasing sequence of the store's points in `(x_lo, x_hi] x (t_lo, t_hi]`.
 *
 * # Safety
 * `store` must be a live handle; `out_length` must be writable.
 */
enum HlStatus hl_lis_in(const struct HlPointStore *store,
                        double x_lo,
                        double x_hi,
                        double t_lo,
                        double t_hi,
                        size_t *out_length);

/**
 * Inverse width from `(corner_x, corner_t)`; writes `INFINITY` when no
 * sequence of length `m` fits within `width_cap`.
 *
 * # Safety
 * `store` must be a live handle; `out_width` must be writable.
 */
enum HlStatus hl_gamma(const struct HlPointStore *store,
                       double corner_x,
                       double corner_t,
                       size_t m,
                       double tau,
                       double width_cap,
                       double *out_width);

/**
 * Evolves particles `i_min .. i_min + len - 1` from `time` to `t` by
 * replaying the store's points; writes `len` positions.
 *
 * # Safety
 * `positions` and `out_positions` must hold `len` values; `store` must be live.
 */
enum HlStatus hl_evolve_event_driven(const struct HlPointStore *store,
                                     int64_t i_min,
                                     const double *positions,
                                     size_t len,
                                     double time,
                                     double t,
                                     double *out_positions);

/**
 * Variational positions at `t` of `labels`, with candidate corners
 * `[k - shift - half_width, k - shift + half_width]` clipped to the
 * configuration and to `k`. Pass `half_width = 0` for the full window.
 *
 * # Safety
 * `positions` must hold `len` values, `labels` and `out_positions` must hold
 * `n_labels` values; `store` must be live.
 */
enum HlStatus hl_evolve_variational(const struct HlPointStore *store,
                                    int64_t i_min,
                                    const double *positions,
                                    size_t len,
                                    double time,
                                    double t,
                                    const int64_t *labels,
                                    size_t n_labels,
                                    int64_t shift,
                                    uint64_t half_width,
                                    uint32_t max_widenings,
                                    double *out_positions);

/**
 * Builds `V0` with `V0(0) = 0` from a piecewise-linear density given by
 * knots and one-sided limits. Tails must be flat (`left_slope` and
 * `right_slope` zero).
 *
 * # Safety
 * `knots`, `left_limits`, `right_limits` must hold `len` values;
 * `out_potential` must be writable.
 */
enum HlStatus hl_potential_from_density(const double *knots,
                                        const double *left_limits,
                                        const double *right_limits,
                                        size_t len,
                                        double left_slope,
                                        double right_slope,
                                        struct HlPotential **out_potential);

/**
 * Releases a potential; NULL is ignored.
 *
 * # Safety
 * `potential` must come from [`hl_potential_from_density`] and not be used afterwards.
 */
void hl_potential_free(struct HlPotential *potential);

/**
 * `V(x, t)` and its smallest minimizer.
 *
 * # Safety
 * `potential` must be live; both out-pointers must be writable.
 */
enum HlStatus hl_hopf_lax(const struct HlPotential *potential,
                          double x,
                          double t,
                          double *out_value,
                          double *out_minimizer);

/**
 * Entropy solution `v(x, t)` (left-continuous at shocks).
 *
 * # Safety
 * `potential` must be live; `out_value` must be writable.
 */
enum HlStatus hl_entropy_solution(const struct HlPotential *potential,
                                  double x,
                                  double t,
                                  double *out_value);

/**
 * `I(x) = 2x acosh(x/2) - 2 sqrt(x^2 - 4)` for `x >= 2`, zero below.
 */
double hl_rate_i(double x);

/**
 * `max(nu - 2 beta, nu / 3)`.
 */
double hl_error_exponent(double nu, double beta);

/**
 * `floor(2 n^nu q t)`.
 */
int64_t hl_translation(uint64_t n, double nu, double q, double t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HAMMERSLEY_LAB_H */
