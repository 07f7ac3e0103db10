#ifndef STABLE_MALLOWS_H
#define STABLE_MALLOWS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Decomposition method codes for [`sm_decompose_json`] and [`sm_estimate_gamma_csv`].
 */
#define SM_METHOD_CERTIFIED 0

#define SM_METHOD_EXACT 1

#define SM_METHOD_AUTO 2

/**
 * Result of every call.
 */
typedef enum SmStatus {
  SM_STATUS_OK = 0,
  SM_STATUS_NULL_POINTER = 1,
  SM_STATUS_INVALID_ARGUMENT = 2,
  SM_STATUS_BUDGET_EXCEEDED = 3,
  SM_STATUS_MALFORMED = 4,
  SM_STATUS_PANIC = 5,
  SM_STATUS_INTERNAL = 6,
} SmStatus;

/**
 * Opaque preference structure.
 */
typedef struct SmPrefs SmPrefs;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *sm_last_error(void);

/**
 * Sample a preference structure on `[1, n]`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SmStatus sm_prefs_sample(double q, size_t n, uint64_t seed, struct SmPrefs **out);

/**
 * The two-matching gadget on `[-m, m]`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SmStatus sm_prefs_gadget(int64_t m, struct SmPrefs **out);

/**
 * Parse a preference document.
 *
 * # Safety
 * `json` must be a NUL-terminated UTF-8 string and `out` valid for writes.
 */
enum SmStatus sm_prefs_from_json(const char *json, struct SmPrefs **out);

/**
 * Release a handle. Null is ignored.
 *
 * # Safety
 * `p` must be null or a handle from this library not yet freed.
 */
void sm_prefs_free(struct SmPrefs *p);

/**
 * Domain bounds of a structure.
 *
 * # Safety
 * `p` must be a live handle; `lo` and `hi` valid for writes.
 */
enum SmStatus sm_prefs_domain(const struct SmPrefs *p, int64_t *lo, int64_t *hi);

/**
 * Preference document as JSON.
 *
 * # Safety
 * `p` must be a live handle and `out` valid for writes.
 */
enum SmStatus sm_prefs_to_json(const struct SmPrefs *p, char **out);

/**
 * Exact number of stable matchings as a decimal string, and its natural log.
 * `log_count` may be null.
 *
 * # Safety
 * `p` must be a live handle, `decimal` valid for writes, `log_count` null or valid.
 */
enum SmStatus sm_count_stable(const struct SmPrefs *p,
                              uint64_t budget,
                              char **decimal,
                              double *log_count);

/**
 * Block decomposition with per-block counts, as JSON.
 *
 * # Safety
 * `p` must be a live handle and `out` valid for writes.
 */
enum SmStatus sm_decompose_json(const struct SmPrefs *p,
                                int32_t method_code,
                                uint64_t budget,
                                char **out);

/**
 * Log of the certified-cut probability bound at `N`; `finite` is 0 when vacuous.
 *
 * # Safety
 * `log_value` and `finite` must be valid for writes.
 */
enum SmStatus sm_rho_lower_bound(double q, uint64_t n_param, double *log_value, int32_t *finite);

/**
 * Growth-rate estimate; the per-trial CSV goes to `csv`, the estimate and
 * its standard error to `gamma_hat` and `std_err` (either may be null).
 *
 * # Safety
 * `csv` must be valid for writes; `gamma_hat` and `std_err` null or valid.
 */
enum SmStatus sm_estimate_gamma_csv(double q,
                                    size_t n,
                                    uint64_t trials,
                                    uint64_t seed,
                                    int32_t method_code,
                                    uint64_t budget,
                                    char **csv,
                                    double *gamma_hat,
                                    double *std_err);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void sm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STABLE_MALLOWS_H */
