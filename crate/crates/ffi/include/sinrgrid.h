/* C interface of the sinrgrid power-control library. */

#ifndef SINRGRID_H
#define SINRGRID_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call in this interface.
typedef enum SgStatus {
  // The call succeeded and all out-parameters are valid.
  SG_STATUS_OK = 0,
  // A pointer was null or a parameter was outside its domain.
  SG_STATUS_INVALID_ARGUMENT = 1,
  // The requested configuration admits no positive finite-power solution.
  SG_STATUS_INFEASIBLE = 2,
  // No fixed point exists at the requested target (beyond the critical
  // point).
  SG_STATUS_NO_SOLUTION = 3,
  // A numeric procedure failed to converge or degenerated.
  SG_STATUS_NUMERIC = 4,
  // A panic was caught at the boundary; the handle remains usable.
  SG_STATUS_PANIC = 5,
} SgStatus;

// Opaque network model: lattice geometry plus channel constants.
typedef struct SgModel SgModel;

// Stable-branch asymptotic solution at one `(gamma, e)` point.
typedef struct SgAnalyticPower {
  // Fixed-point parameter of the erasure-averaged resolvent.
  double beta;
  // Mean transmit power per active link.
  double p_ave;
  // Per-link transmit-power variance.
  double variance;
} SgAnalyticPower;

// Minimum-power solve of one sampled erasure realization.
typedef struct SgSampleStats {
  // 1 when a positive finite-power solution exists, else 0.
  int32_t feasible;
  // Number of links that survived the erasure draw.
  uint64_t active_links;
  // Mean power over active links; NaN when infeasible.
  double p_ave;
  // Power variance (erased links count as zero power, normalized per
  // active link); NaN when infeasible.
  double p_var;
  // Smallest eigenvalue of the active-link coupling matrix; negative when
  // infeasible, NaN when no links survived.
  double min_active_eigenvalue;
} SgSampleStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *sg_version(void);

// Static NUL-terminated name of a status code.
const char *sg_status_name(enum SgStatus status);

// Copies the calling thread's most recent error message into `buf` as a
// NUL-terminated string, truncating to `cap` bytes, and returns the full
// message length in bytes (excluding the NUL). `buf` may be null (or `cap`
// zero) to query the length alone.
//
// # Safety
//
// When `buf` is non-null it must point to `cap` writable bytes.
uintptr_t sg_last_error_message(char *buf, uintptr_t cap);

// Creates a model of `side^dim` links on a torus with antenna scale `s`,
// pathloss exponent `alpha`, and noise power `noise`; writes the handle to
// `out_model`.
//
// # Safety
//
// `out_model` must be a valid pointer. The returned handle must be released
// with [`sg_model_free`].
enum SgStatus sg_model_new(uint32_t dim,
                           uint32_t side,
                           double s,
                           double alpha,
                           double noise,
                           struct SgModel **out_model);

// Releases a model handle. Null is ignored.
//
// # Safety
//
// `model` must be null or a handle obtained from [`sg_model_new`] that has
// not been freed yet.
void sg_model_free(struct SgModel *model);

// Writes the number of links in the model to `out_links`.
//
// # Safety
//
// `model` must be a live handle and `out_links` a valid pointer.
enum SgStatus sg_model_links(const struct SgModel *model, uint64_t *out_links);

// Writes the total interference gain seen by one link (the lattice sum of
// the gain profile over all other sites) to `out_sum`.
//
// # Safety
//
// `model` must be a live handle and `out_sum` a valid pointer.
enum SgStatus sg_interference_sum(const struct SgModel *model, double *out_sum);

// Writes the largest supportable target of the fully active network to
// `out_gamma`.
//
// # Safety
//
// `model` must be a live handle and `out_gamma` a valid pointer.
enum SgStatus sg_max_feasible_gamma(const struct SgModel *model, double *out_gamma);

// Writes the critical target at erasure probability `e` (the edge beyond
// which no finite-power solution exists) to `out_gamma`. Requires
// `0 < e < 1`; at `e = 0` use [`sg_max_feasible_gamma`].
//
// # Safety
//
// `model` must be a live handle and `out_gamma` a valid pointer.
enum SgStatus sg_critical_gamma(const struct SgModel *model, double e, double *out_gamma);

// Writes the stable-branch asymptotic solution at `(gamma, e)` to `out`.
// Returns `SG_STATUS_NO_SOLUTION` beyond the critical target. Requires
// `0 <= e < 1`.
//
// # Safety
//
// `model` must be a live handle and `out` a valid pointer.
enum SgStatus sg_analytic_power(const struct SgModel *model,
                                double gamma,
                                double e,
                                struct SgAnalyticPower *out);

// Writes the mean-field power estimate at `(gamma, e)` to `out_power`.
// Returns `SG_STATUS_INFEASIBLE` at or beyond the mean-field singular
// target.
//
// # Safety
//
// `model` must be a live handle and `out_power` a valid pointer.
enum SgStatus sg_mean_field_power(const struct SgModel *model,
                                  double gamma,
                                  double e,
                                  double *out_power);

// Draws one erasure realization from `seed`, solves the surviving network
// at target `gamma`, and writes the outcome to `out_stats`.
//
// Infeasibility of the sampled network is not an error: the call returns
// `SG_STATUS_OK` with `feasible = 0` and diagnostic fields filled in.
//
// # Safety
//
// `model` must be a live handle and `out_stats` a valid pointer.
enum SgStatus sg_sample_power(const struct SgModel *model,
                              double gamma,
                              double e,
                              uint64_t seed,
                              struct SgSampleStats *out_stats);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SINRGRID_H */
