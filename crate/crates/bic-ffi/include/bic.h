#ifndef BIC_H
#define BIC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BicMode {
  BIC_MODE_FULL = 0,
  BIC_MODE_LARGE_SPACING = 1,
} BicMode;

/*
 Sector selector; `BIC_SECTOR_BOTH` is accepted only by [`bic_solve`].
 */
typedef enum BicSector {
  BIC_SECTOR_ANTISYMMETRIC = 0,
  BIC_SECTOR_SYMMETRIC = 1,
  BIC_SECTOR_BOTH = 2,
} BicSector;

typedef enum BicSheet {
  BIC_SHEET_FIRST = 1,
  BIC_SHEET_SECOND = 2,
  BIC_SHEET_THIRD = 3,
} BicSheet;

/*
 Status codes returned by every function.
 */
typedef enum BicStatus {
  BIC_STATUS_OK = 0,
  BIC_STATUS_NULL_POINTER = 1,
  BIC_STATUS_DOMAIN = 2,
  BIC_STATUS_CONTINUATION = 3,
  BIC_STATUS_ACCURACY = 4,
  BIC_STATUS_SIZE_MISMATCH = 5,
  BIC_STATUS_DECOMPOSITION = 6,
  BIC_STATUS_LABEL = 7,
  BIC_STATUS_CONFIG = 8,
  BIC_STATUS_NO_CONVERGENCE = 9,
  BIC_STATUS_OUT_OF_RANGE = 10,
  BIC_STATUS_PANIC = 11,
} BicStatus;

/*
 Opaque system definition.
 */
typedef struct BicParams BicParams;

/*
 Opaque list of solved states.
 */
typedef struct BicStateList BicStateList;

/*
 Scalar summary of one state.
 */
typedef struct BicStateSummary {
  size_t n;
  double energy;
  double epsilon;
  double chi;
  double p;
  double field_norm;
  double constraint_residual;
  /*
   0 antisymmetric, 1 symmetric, 2 none
   */
  int32_t sector;
  uint32_t nu_nearest;
  bool exact_resonance;
} BicStateSummary;

typedef struct BicCriticalPoint {
  double d_c;
  double e_c;
  double chi_c;
  double epsilon_c;
  /*
   negative when the sheet poles could not be polished
   */
  double merge_gap;
} BicCriticalPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message of this thread into `buf` (NUL-terminated,
 truncated to `len − 1` bytes) and returns the full message length.

 # Safety
 `buf` must be null or valid for `len` bytes of writes.
 */
size_t bic_last_error_message(char *buf, size_t len);

/*
 Library version as a static NUL-terminated string.
 */
const char *bic_version(void);

/*
 Creates a parameter handle.

 # Safety
 `out` must be valid for a pointer write.
 */
enum BicStatus bic_params_new(size_t n,
                              double epsilon,
                              double d,
                              double gamma,
                              struct BicParams **out);

/*
 # Safety
 `params` must be null or a handle from [`bic_params_new`] not yet freed.
 */
void bic_params_free(struct BicParams *params);

/*
 E_ν(d) = √(1 + ν²π²/d²).

 # Safety
 `out` must be valid for a write.
 */
enum BicStatus bic_resonant_energy(uint32_t nu, double d, double *out);

/*
 Solves for the BICs of `params` (n, d, γ) with energies in
 [e_min, e_max]. ε of `params` is not used.

 # Safety
 `params` must be a live handle and `out` valid for a pointer write.
 */
enum BicStatus bic_solve(const struct BicParams *params,
                         enum BicSector sector,
                         enum BicMode mode,
                         double e_min,
                         double e_max,
                         struct BicStateList **out);

/*
 # Safety
 `list` must be a live handle from [`bic_solve`].
 */
size_t bic_state_list_len(const struct BicStateList *list);

/*
 # Safety
 `list` must be a live handle and `out` valid for a write.
 */
enum BicStatus bic_state_get(const struct BicStateList *list,
                             size_t index,
                             struct BicStateSummary *out);

/*
 Writes the n complex amplitudes of state `index` into `re` and `im`,
 each of length at least `len`.

 # Safety
 `list` must be a live handle; `re` and `im` valid for `len` writes.
 */
enum BicStatus bic_state_amplitudes(const struct BicStateList *list,
                                    size_t index,
                                    double *re,
                                    double *im,
                                    size_t len);

/*
 # Safety
 `list` must be null or a live handle from [`bic_solve`].
 */
void bic_state_list_free(struct BicStateList *list);

/*
 Newton search for a pole of one sector block on `sheet`, from z0.

 # Safety
 `params` must be a live handle; `re` and `im` valid for writes.
 */
enum BicStatus bic_find_pole(const struct BicParams *params,
                             enum BicSector sector,
                             enum BicSheet sheet,
                             double re0,
                             double im0,
                             double *re,
                             double *im);

/*
 Closed-form approximant of pole `index` of one sector.

 # Safety
 `params` must be a live handle; `re` and `im` valid for writes.
 */
enum BicStatus bic_approx_pole(const struct BicParams *params,
                               enum BicSector sector,
                               size_t index,
                               double *re,
                               double *im);

/*
 Critical spacing of the nonperturbative pair between E_ν and E_{ν+1}.

 # Safety
 `out` must be valid for a write.
 */
enum BicStatus bic_critical_distance(size_t n,
                                     double gamma,
                                     uint32_t nu,
                                     struct BicCriticalPoint *out);

/*
 Closed-form probability of a class given by its label (e.g. "n3-a").

 # Safety
 `class_label` must be a NUL-terminated string; `out` valid for a write.
 */
enum BicStatus bic_probability_approximant(const char *class_label,
                                           uint32_t nu,
                                           double d,
                                           double gamma,
                                           double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BIC_H */
