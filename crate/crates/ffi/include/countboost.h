#ifndef COUNTBOOST_H
#define COUNTBOOST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CbDivisor {
  CB_DIVISOR_N = 0,
  CB_DIVISOR_N_MINUS_ONE = 1,
} CbDivisor;

typedef enum CbStatus {
  CB_STATUS_OK = 0,
  CB_STATUS_NULL_POINTER = 1,
  CB_STATUS_INVALID_INPUT = 2,
  CB_STATUS_CONFIG = 3,
  CB_STATUS_LENGTH_MISMATCH = 4,
  CB_STATUS_DEGENERATE = 5,
  CB_STATUS_PANIC = 99,
} CbStatus;

typedef enum CbVerdict {
  CB_VERDICT_A_WINS = 0,
  CB_VERDICT_B_WINS = 1,
  CB_VERDICT_INCONCLUSIVE = 2,
  CB_VERDICT_TIE = 3,
  CB_VERDICT_DEGENERATE = 4,
} CbVerdict;

/**
 * Opaque forecaster handle.
 */
typedef struct CbForecaster CbForecaster;

/**
 * Residual model hyperparameters.
 */
typedef struct CbConfig {
  double kappa;
  double m;
  double delta;
  double eta;
} CbConfig;

typedef struct CbPrediction {
  double lambda_hat;
  double mu_hat;
  double x_hat;
} CbPrediction;

/**
 * `statistic` and `p_value` are NaN for ties and degenerate variance.
 */
typedef struct CbDmResult {
  double statistic;
  double p_value;
  double mean_d;
  double variance_d;
  size_t n;
  enum CbVerdict verdict;
} CbDmResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *cb_last_error_message(void);

/**
 * Fills `out` with the default hyperparameters.
 *
 * # Safety
 * `out` must be NULL or point to writable memory for one `CbConfig`.
 */
enum CbStatus cb_config_default(struct CbConfig *out);

/**
 * Creates a forecaster primed with the first observation. A NULL `config`
 * selects the defaults.
 *
 * # Safety
 * `config` must be NULL or valid; `out` must point to writable memory.
 */
enum CbStatus cb_forecaster_new(uint64_t x1,
                                const struct CbConfig *config,
                                struct CbForecaster **out);

/**
 * Forecast for the next step.
 *
 * # Safety
 * `handle` must come from `cb_forecaster_new`; `out` must be writable.
 */
enum CbStatus cb_forecaster_predict(const struct CbForecaster *handle, struct CbPrediction *out);

/**
 * Absorbs the count `x`. Negative counts are rejected and leave the state
 * untouched.
 *
 * # Safety
 * `handle` must come from `cb_forecaster_new`.
 */
enum CbStatus cb_forecaster_observe(struct CbForecaster *handle, int64_t x);

/**
 * Number of observations absorbed after the first.
 *
 * # Safety
 * `handle` must be NULL or come from `cb_forecaster_new`.
 */
uint64_t cb_forecaster_steps(const struct CbForecaster *handle);

/**
 * # Safety
 * `handle` must be NULL or come from `cb_forecaster_new`, and not be used
 * afterwards.
 */
void cb_forecaster_free(struct CbForecaster *handle);

/**
 * Boosted forecast from a base rate and a log-residual mean.
 */
double cb_boost(double lambda_hat, double mu_hat);

/**
 * POCID in percent. `actual` holds n+1 values starting one step before the
 * first forecast target; `predicted` holds n forecasts.
 *
 * # Safety
 * The arrays must hold the stated number of elements; `out` must be writable.
 */
enum CbStatus cb_pocid(const double *actual,
                       size_t actual_len,
                       const double *predicted,
                       size_t predicted_len,
                       enum CbDivisor divisor,
                       double *out);

/**
 * Mean squared error over equal-length arrays.
 *
 * # Safety
 * Both arrays must hold `len` elements; `out` must be writable.
 */
enum CbStatus cb_mse(const double *actual, const double *predicted, size_t len, double *out);

/**
 * Diebold-Mariano test on forecast errors of models a and b.
 *
 * # Safety
 * Both arrays must hold `len` elements; `out` must be writable.
 */
enum CbStatus cb_dm_test(const double *errors_a,
                         const double *errors_b,
                         size_t len,
                         double significance,
                         enum CbDivisor divisor,
                         struct CbDmResult *out);

/**
 * NUL-terminated library version.
 */
const char *cb_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COUNTBOOST_H */
