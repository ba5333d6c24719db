#ifndef CESARO_H
#define CESARO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  CESARO_STATUS_OK = 0,
  CESARO_STATUS_NULL_POINTER = 1,
  CESARO_STATUS_INVALID_ARGUMENT = 2,
  CESARO_STATUS_CONFIG = 3,
  CESARO_STATUS_INFEASIBLE = 4,
  CESARO_STATUS_OVERFLOW = 5,
  CESARO_STATUS_IO = 6,
  CESARO_STATUS_INTERNAL = 7,
} CesaroStatus;

typedef enum {
  CESARO_SUITE_THEOREM1 = 0,
  CESARO_SUITE_LEMMAS = 1,
  CESARO_SUITE_NORMS = 2,
  CESARO_SUITE_RESIDUALITY = 3,
  CESARO_SUITE_ALL = 4,
} CesaroSuite;

/**
 * A loaded scenario with its factor space, function and `z0`.
 */
typedef struct CesaroModel CesaroModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *cesaro_last_error(void);

/**
 * Parses scenario TOML text into a new model.
 *
 * # Safety
 * `toml` must be a nul-terminated string; `out` must be writable.
 */
CesaroStatus cesaro_model_from_toml(const char *toml, CesaroModel **out);

/**
 * Loads a scenario file into a new model.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out` must be writable.
 */
CesaroStatus cesaro_model_from_file(const char *path, CesaroModel **out);

/**
 * # Safety
 * `model` must come from this library and not be used afterwards. Null is ignored.
 */
void cesaro_model_free(CesaroModel *model);

/**
 * Number of chains, or 0 for a null model.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t cesaro_model_chain_count(const CesaroModel *model);

/**
 * # Safety
 * `out` must be writable.
 */
CesaroStatus cesaro_floor_log3(uint64_t x, uint32_t *out);

/**
 * Number of powers of three in `(n, n+m]`.
 */
uint32_t cesaro_sign_flip_count(uint64_t n, uint64_t m);

/**
 * `σ(n, m)` as `1` or `-1`.
 */
int8_t cesaro_sigma(uint64_t n, uint64_t m);

/**
 * `(S^k v)(chain, n)`.
 *
 * # Safety
 * `model` must be a live handle; `re` and `im` must be writable.
 */
CesaroStatus cesaro_iterate(const CesaroModel *model,
                            size_t chain,
                            uint64_t n,
                            uint64_t k,
                            double *re,
                            double *im);

/**
 * Blockwise Cesàro average `A_N(v; chain, n)` with `N = count`.
 *
 * # Safety
 * `model` must be a live handle; `re` and `im` must be writable.
 */
CesaroStatus cesaro_average(const CesaroModel *model,
                            size_t chain,
                            uint64_t n,
                            uint64_t count,
                            double *re,
                            double *im);

/**
 * Diameter estimate of the averages at cell `(chain, 0)` over checkpoints
 * `t_min..=t_max`.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
CesaroStatus cesaro_diameter(const CesaroModel *model,
                             size_t chain,
                             uint32_t t_min,
                             uint32_t t_max,
                             double *out);

/**
 * Minimum diameter estimate over all chains.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
CesaroStatus cesaro_margin(const CesaroModel *model, uint32_t t_min, uint32_t t_max, double *out);

/**
 * L¹, L∞ and L¹+L∞ norms of the model function. An infinite L¹ norm is
 * reported as `INFINITY`.
 *
 * # Safety
 * `model` must be a live handle; the outputs must be writable.
 */
CesaroStatus cesaro_norms(const CesaroModel *model, double *l1, double *linf, double *l1_plus_linf);

/**
 * Runs a verification suite with the scenario's seed. Writes the rendered
 * report (free with [`cesaro_string_free`]) and the number of failed checks.
 *
 * # Safety
 * `model` must be a live handle; `report` and `failed` must be writable.
 */
CesaroStatus cesaro_verify(const CesaroModel *model,
                           CesaroSuite suite,
                           char **report,
                           size_t *failed);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is ignored.
 */
void cesaro_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CESARO_H */
