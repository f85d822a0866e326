#ifndef OPRENEWAL_H
#define OPRENEWAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum OprStatus {
  OPR_STATUS_OK = 0,
  OPR_STATUS_NULL_POINTER = 1,
  OPR_STATUS_INVALID_INPUT = 2,
  OPR_STATUS_NO_UNIT_EIGENVALUE = 3,
  OPR_STATUS_NOT_SIMPLE = 4,
  OPR_STATUS_MU_ZERO = 5,
  OPR_STATUS_ORDER_UNSUPPORTED = 6,
  OPR_STATUS_PROJECTION_NOT_ZERO = 7,
  OPR_STATUS_DIVERGENT = 8,
  OPR_STATUS_NUMERICAL = 9,
  OPR_STATUS_UNSUPPORTED = 10,
  OPR_STATUS_PERIODIC_RETURNS = 11,
  OPR_STATUS_CONFIG = 12,
  OPR_STATUS_IO = 13,
  OPR_STATUS_BUFFER_TOO_SMALL = 14,
  OPR_STATUS_PANIC = 15,
} OprStatus;

/**
 * Expansion of `T_n` with its residuals.
 */
typedef struct OprExpansion OprExpansion;

/**
 * Ulam discretization of the LSV map with its invariant measure.
 */
typedef struct OprLsvModel OprLsvModel;

/**
 * Observable discretized on a model's grid.
 */
typedef struct OprObservable OprObservable;

/**
 * First-return operator sequence `R_1, ..., R_M`.
 */
typedef struct OprOperatorSeq OprOperatorSeq;

/**
 * Spectral data at the eigenvalue 1 of `R(1)`.
 */
typedef struct OprSpectral OprSpectral;

/**
 * Young tower over an i.i.d. base.
 */
typedef struct OprTower OprTower;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t opr_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *opr_version(void);

/**
 * Builds `R_n` from `count` row-major `dim × dim` blocks. `asymptotic`
 * selects the power-law continuation past the last term.
 *
 * # Safety
 * `terms` must point to `count * dim * dim` doubles; `out` must be writable.
 */
enum OprStatus opr_operator_new(size_t dim,
                                const double *terms,
                                size_t count,
                                double beta,
                                bool asymptotic,
                                struct OprOperatorSeq **out);

/**
 * Scalar `R_n ∝ n^{-(β+1)}` normalized to total mass one.
 *
 * # Safety
 * `out` must be writable.
 */
enum OprStatus opr_operator_power_law(double beta, size_t horizon, struct OprOperatorSeq **out);

/**
 * # Safety
 * `op` must come from this library and not be used afterwards.
 */
void opr_operator_free(struct OprOperatorSeq *op);

/**
 * # Safety
 * `op` must be a live handle or null (returns 0).
 */
size_t opr_operator_dim(const struct OprOperatorSeq *op);

/**
 * Writes `T_0, ..., T_N` row-major into `buf` (`(N+1) d²` doubles).
 *
 * # Safety
 * `op` must be live; `buf` must hold `len` doubles.
 */
enum OprStatus opr_renewal_solve(const struct OprOperatorSeq *op,
                                 size_t n_max,
                                 double *buf,
                                 size_t len);

/**
 * # Safety
 * `op` must be live; `out` must be writable.
 */
enum OprStatus opr_spectral_new(const struct OprOperatorSeq *op, struct OprSpectral **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void opr_spectral_free(struct OprSpectral *s);

/**
 * `μ` with `P R'(1) P = μ P`.
 *
 * # Safety
 * `s` must be live; `mu` must be writable.
 */
enum OprStatus opr_spectral_mu(const struct OprSpectral *s, double *mu);

/**
 * Writes the projection `P` row-major (`d²` doubles).
 *
 * # Safety
 * `s` must be live; `buf` must hold `len` doubles.
 */
enum OprStatus opr_spectral_projection(const struct OprSpectral *s, double *buf, size_t len);

/**
 * Expansion truncated after the `μ^{-order}` term, `order` in 1..=4.
 *
 * # Safety
 * `op` and `s` must be live and belong together; `out` must be writable.
 */
enum OprStatus opr_expansion_new(const struct OprOperatorSeq *op,
                                 const struct OprSpectral *s,
                                 size_t n_max,
                                 size_t order,
                                 struct OprExpansion **out);

/**
 * # Safety
 * `e` must come from this library and not be used afterwards.
 */
void opr_expansion_free(struct OprExpansion *e);

/**
 * Residual norms `‖T_n - prediction_n‖` for `n = 0..=N`.
 *
 * # Safety
 * `e` must be live; `buf` must hold `len` doubles.
 */
enum OprStatus opr_expansion_residuals(const struct OprExpansion *e, double *buf, size_t len);

/**
 * Fitted decay exponent of the residuals on the last decade, and the
 * exponent of the predicted class.
 *
 * # Safety
 * `e` must be live; `fitted` and `predicted` must be writable.
 */
enum OprStatus opr_expansion_exponents(const struct OprExpansion *e,
                                       double *fitted,
                                       double *predicted);

/**
 * Smallest singular value of `I - R(e^{iθ})` over `grid_points` angles
 * outside the default arc around 0, and where it occurs.
 *
 * # Safety
 * `op` must be live; outputs must be writable.
 */
enum OprStatus opr_aperiodicity(const struct OprOperatorSeq *op,
                                size_t grid_points,
                                double *min_singular_value,
                                double *angle);

/**
 * Cauchy product of two length-`n` sequences into `out` (`n` doubles).
 *
 * # Safety
 * `a`, `b` and `out` must each hold `n` doubles.
 */
enum OprStatus opr_convolve(const double *a, const double *b, size_t n, double *out);

/**
 * Power-law fit of `values[lo..=hi]`: decay exponent, and the log power of
 * the fit with a `log log n` regressor.
 *
 * # Safety
 * `values` must hold `n` doubles; outputs must be writable.
 */
enum OprStatus opr_rate_fit(const double *values,
                            size_t n,
                            size_t lo,
                            size_t hi,
                            double *gamma,
                            double *log_power);

/**
 * # Safety
 * `out` must be writable.
 */
enum OprStatus opr_lsv_new(double alpha,
                           size_t ladder_levels,
                           double max_width,
                           size_t y_cells,
                           struct OprLsvModel **out);

/**
 * # Safety
 * `m` must come from this library and not be used afterwards.
 */
void opr_lsv_free(struct OprLsvModel *m);

/**
 * `(1/4) h(1/2) α^{-1/α} / (1/α - 1)`.
 *
 * # Safety
 * `m` must be live; `out` must be writable.
 */
enum OprStatus opr_lsv_leading_constant(const struct OprLsvModel *m, double *out);

/**
 * Observable from a JSON spec such as
 * `{"type":"bump","lo":0.6,"hi":0.9,"ramp":0.05}`.
 *
 * # Safety
 * `m` must be live; `spec_json` must be a NUL-terminated string; `out` must
 * be writable. The observable may only be used with the same model.
 */
enum OprStatus opr_observable_new(const struct OprLsvModel *m,
                                  const char *spec_json,
                                  struct OprObservable **out);

/**
 * # Safety
 * `o` must come from this library and not be used afterwards.
 */
void opr_observable_free(struct OprObservable *o);

/**
 * `∫ f dμ` under the model's invariant measure.
 *
 * # Safety
 * `o` must be live; `out` must be writable.
 */
enum OprStatus opr_observable_mean(const struct OprObservable *o, double *out);

/**
 * `Cor(f, g∘T^n)` for `n = 0..=n_max` into `buf`.
 *
 * # Safety
 * All handles must be live and built on `m`; `buf` must hold `len` doubles.
 */
enum OprStatus opr_lsv_correlations(const struct OprLsvModel *m,
                                    const struct OprObservable *f,
                                    const struct OprObservable *g,
                                    size_t n_max,
                                    double *buf,
                                    size_t len);

/**
 * Tower with `P(R > n) = (n+1)^{-β}` stored up to `truncation`.
 *
 * # Safety
 * `out` must be writable.
 */
enum OprStatus opr_tower_power_law(double beta, size_t truncation, struct OprTower **out);

/**
 * Tower with return times `times[i]` taken with probability `probs[i]`.
 *
 * # Safety
 * `times` and `probs` must hold `n` values; `out` must be writable.
 */
enum OprStatus opr_tower_from_returns(const uint64_t *times,
                                      const double *probs,
                                      size_t n,
                                      struct OprTower **out);

/**
 * # Safety
 * `t` must come from this library and not be used afterwards.
 */
void opr_tower_free(struct OprTower *t);

/**
 * Level mass `m_l = P(R > l) / E[R]`.
 *
 * # Safety
 * `t` must be live; `out` must be writable.
 */
enum OprStatus opr_tower_level_mass(const struct OprTower *t, size_t level, double *out);

/**
 * Exact `Cor(f, g∘F^n)`, `n = 0..=n_max`, for level observables given by
 * their values on levels `0..f_len` and `0..g_len`.
 *
 * # Safety
 * `t` must be live; `f`, `g` must hold `f_len`, `g_len` doubles; `buf` must
 * hold `len` doubles.
 */
enum OprStatus opr_tower_correlations(const struct OprTower *t,
                                      const double *f,
                                      size_t f_len,
                                      const double *g,
                                      size_t g_len,
                                      size_t n_max,
                                      double *buf,
                                      size_t len);

/**
 * Runs a named acceptance experiment and writes `<id>.csv` and `<id>.json`
 * under `out_dir`. `passed` receives whether every check held.
 *
 * # Safety
 * `id` and `out_dir` must be NUL-terminated strings; `passed` must be
 * writable.
 */
enum OprStatus opr_experiment_run(const char *id, uint64_t seed, const char *out_dir, bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPRENEWAL_H */
