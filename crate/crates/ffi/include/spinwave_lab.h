#ifndef SPINWAVE_LAB_H
#define SPINWAVE_LAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SwlStatus {
  SWL_OK = 0,
  SWL_NULL_POINTER = 1,
  SWL_INVALID_INPUT = 2,
  SWL_BUDGET = 3,
  SWL_PRECONDITION = 4,
  SWL_NOT_CONVERGED = 5,
  SWL_IO = 6,
  SWL_INTERNAL = 7,
} SwlStatus;

/**
 * Records of one experiment run.
 */
typedef struct SwlRecords SwlRecords;

/**
 * Eigenvalues of one particle-number sector, ascending.
 */
typedef struct SwlSpectrum SwlSpectrum;

typedef struct SwlConstants {
  double c0;
  double c3;
  double c4;
  double b0;
  double zeta_3_2;
  double zeta_5_2;
} SwlConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next call into the library from the same thread.
 */
const char *swl_last_error(void);

/**
 * Partition function and free energy per site of a box at one beta.
 *
 * # Safety
 * `z` and `f` must be valid for writes.
 */
enum SwlStatus swl_free_energy(uintptr_t dim,
                               uintptr_t side,
                               uint32_t two_s,
                               double beta,
                               double *z,
                               double *f);

/**
 * Eigenvalues of the open-boundary Heisenberg Hamiltonian in sector `n`:
 * all of them, or the lowest few when the sector exceeds the dense threshold.
 *
 * # Safety
 * `out` must be valid for writes. The handle written there is released
 * with [`swl_spectrum_free`].
 */
enum SwlStatus swl_spectrum_new(uintptr_t dim,
                                uintptr_t side,
                                uint32_t two_s,
                                uintptr_t n,
                                struct SwlSpectrum **out);

/**
 * # Safety
 * `h` must be null or a live handle from [`swl_spectrum_new`].
 */
uintptr_t swl_spectrum_len(const struct SwlSpectrum *h);

/**
 * Copies up to `cap` eigenvalues into `buf`; the count copied goes to `written`.
 *
 * # Safety
 * `h` must be a live handle, `buf` valid for `cap` writes and `written` for one.
 */
enum SwlStatus swl_spectrum_values(const struct SwlSpectrum *h,
                                   double *buf,
                                   uintptr_t cap,
                                   uintptr_t *written);

/**
 * # Safety
 * `h` must be null or a handle from [`swl_spectrum_new`] not freed before.
 */
void swl_spectrum_free(struct SwlSpectrum *h);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum SwlStatus swl_constants(struct SwlConstants *out);

/**
 * Runs an experiment described by a JSON config with the same keys as the
 * command-line flags plus `command`. The `out` key is ignored.
 *
 * # Safety
 * `config_json` must be a nul-terminated string and `out` valid for writes.
 * The handle is released with [`swl_records_free`].
 */
enum SwlStatus swl_run(const char *config_json, struct SwlRecords **out);

/**
 * # Safety
 * `h` must be null or a live handle from [`swl_run`].
 */
uintptr_t swl_records_len(const struct SwlRecords *h);

/**
 * 1 when every record is `ok` with all certificates passing, else 0.
 *
 * # Safety
 * `h` must be null or a live handle from [`swl_run`].
 */
int32_t swl_records_passed(const struct SwlRecords *h);

/**
 * Records as JSON lines. Release the string with [`swl_string_free`].
 *
 * # Safety
 * `h` must be a live handle and `out` valid for writes.
 */
enum SwlStatus swl_records_json(const struct SwlRecords *h, char **out);

/**
 * # Safety
 * `h` must be null or a handle from [`swl_run`] not freed before.
 */
void swl_records_free(struct SwlRecords *h);

/**
 * # Safety
 * `s` must be null or a string from this library not freed before.
 */
void swl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPINWAVE_LAB_H */
