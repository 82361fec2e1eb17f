#ifndef GROSS_TOWER_H
#define GROSS_TOWER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. 2, 3 and 4 agree with the CLI exit codes.
 */
typedef enum {
  GT_OK = 0,
  /**
   * The command ran but some certificate or identity failed (see the report).
   */
  GT_CHECK_FAILED = 1,
  GT_INVALID = 2,
  GT_NONEXISTENT = 3,
  GT_INTERNAL = 4,
  GT_NULL_POINTER = 5,
  GT_BAD_STRING = 6,
  GT_BUFFER_TOO_SMALL = 7,
  GT_PANIC = 8,
} GtStatus;

/**
 * An instance (N⁻, N⁺, p, m, D_K, c, M).
 */
typedef struct GtInstance GtInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates an instance. `d_k = 0` means no imaginary quadratic field; `precision = 0` picks the default.
 *
 * # Safety
 * `out` must be a valid pointer to a `GtInstance *`.
 */
GtStatus gt_instance_new(uint64_t n_minus,
                         uint64_t n_plus,
                         uint64_t p,
                         uint32_t m_max,
                         int64_t d_k,
                         uint64_t c,
                         uint32_t precision,
                         GtInstance **out);

/**
 * # Safety
 * `inst` must come from `gt_instance_new` (or be null) and not be used afterwards.
 */
void gt_instance_free(GtInstance *inst);

/**
 * Class counts and masses for every level m ≤ m_max.
 *
 * # Safety
 * `inst` is a live handle, `out` a valid pointer.
 */
GtStatus gt_classset(const GtInstance *inst, char **out);

/**
 * Hecke operator report at level m_max. `op` is one of "T", "U", "diamond", "Tnn".
 *
 * # Safety
 * `inst` is a live handle, `op` a NUL-terminated string, `out` a valid pointer.
 */
GtStatus gt_hecke(const GtInstance *inst, const char *op, int64_t param, char **out);

/**
 * Writes the Hecke matrix at level `m` (row-major, `matrix[target][source]`) into `buf`.
 * `dim` receives the dimension even when `cap` is too small.
 *
 * # Safety
 * `buf` must hold `cap` elements (may be null when `cap = 0`); `dim` must be valid.
 */
GtStatus gt_hecke_matrix(const GtInstance *inst,
                         const char *op,
                         int64_t param,
                         uint32_t m,
                         int64_t *buf,
                         uintptr_t cap,
                         uintptr_t *dim);

/**
 * Heegner family summary up to r_max; `ell = 0` uses the default auxiliary prime.
 *
 * # Safety
 * `inst` is a live handle, `out` a valid pointer.
 */
GtStatus gt_heegner(const GtInstance *inst, uint32_t r_max, uint64_t ell, char **out);

/**
 * Identity suites ("tower", "euler", "galois", comma separated, or "all"; null means "all").
 *
 * # Safety
 * `inst` is a live handle, `suites` null or NUL-terminated, `out` a valid pointer.
 */
GtStatus gt_verify(const GtInstance *inst, const char *suites, uint64_t ell, char **out);

/**
 * Theta elements θ_n, n ≤ n_max. `eigensystem` is e.g. "2:-2,5:1"; null or empty picks one.
 * `r_max = 0` builds the family depth the layers need.
 *
 * # Safety
 * `inst` is a live handle, `eigensystem` null or NUL-terminated, `out` a valid pointer.
 */
GtStatus gt_theta(const GtInstance *inst,
                  uint32_t n_max,
                  const char *eigensystem,
                  uint32_t r_max,
                  char **out);

/**
 * # Safety
 * `s` must come from this library (or be null) and not be used afterwards.
 */
void gt_string_free(char *s);

/**
 * Message for the last non-OK status on this thread; valid until the next call on the thread.
 */
const char *gt_last_error(void);

/**
 * Output schema tag, e.g. "gross-tower/1". Static storage.
 */
const char *gt_schema(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GROSS_TOWER_H */
