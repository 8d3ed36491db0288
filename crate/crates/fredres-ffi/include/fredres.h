#ifndef FREDRES_H
#define FREDRES_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FredresBranch {
  FredresBranch_Plus = 0,
  FredresBranch_Minus = 1,
} FredresBranch;

typedef enum FredresPreset {
  FredresPreset_Zero = 0,
  /**
   * p = 0, q = 1 on [0, 1]
   */
  FredresPreset_Box = 1,
  /**
   * p = x(1 - x), q = sin(πx) on [0, 1]
   */
  FredresPreset_Smooth = 2,
} FredresPreset;

typedef enum FredresStatus {
  FredresStatus_Ok = 0,
  FredresStatus_NullPointer = 1,
  FredresStatus_InvalidArgument = 2,
  FredresStatus_PoleProximity = 3,
  FredresStatus_Singular = 4,
  FredresStatus_NearZero = 5,
  FredresStatus_Numerical = 6,
  FredresStatus_Panic = 7,
} FredresStatus;

/**
 * Coefficient pair (p, q).
 */
typedef struct FredresCoefficients FredresCoefficients;

/**
 * Located zeros of D₊ in an annulus.
 */
typedef struct FredresResonanceSet FredresResonanceSet;

typedef struct FredresComplex {
  double re;
  double im;
} FredresComplex;

typedef struct FredresResonance {
  double re;
  double im;
  uint32_t multiplicity;
  double residual;
  double certificate_radius;
} FredresResonance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated, truncated to `len`).
 * Returns the full message length in bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must be null or point to at least `len` writable bytes.
 */
uintptr_t fredres_last_error_message(char *buf, uintptr_t len);

/**
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum FredresStatus fredres_coefficients_preset(enum FredresPreset preset,
                                               struct FredresCoefficients **out);

/**
 * Builds coefficients from the `[coefficients]` table of a TOML job configuration.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` a valid pointer to a handle slot.
 */
enum FredresStatus fredres_coefficients_from_toml(const char *toml,
                                                  struct FredresCoefficients **out);

/**
 * # Safety
 * `c` must be null or a handle from this library not yet freed.
 */
void fredres_coefficients_free(struct FredresCoefficients *c);

/**
 * D±(k). `nodes` = 0 selects the ODE route, otherwise a Nyström matrix with that many nodes.
 *
 * # Safety
 * `c` must be a live handle; `out` a valid pointer.
 */
enum FredresStatus fredres_determinant(const struct FredresCoefficients *c,
                                       struct FredresComplex k,
                                       enum FredresBranch branch,
                                       uintptr_t nodes,
                                       struct FredresComplex *out);

/**
 * S₊(k) from the amplitudes and from the determinant ratio D₋/D₊.
 *
 * # Safety
 * `c` must be a live handle; `s` and `s_det` valid pointers.
 */
enum FredresStatus fredres_smatrix_plus(const struct FredresCoefficients *c,
                                        struct FredresComplex k,
                                        uintptr_t nodes,
                                        struct FredresComplex *s,
                                        struct FredresComplex *s_det);

/**
 * Zeros of D₊ in r_min ≤ |k| ≤ r_max (ODE route).
 *
 * # Safety
 * `c` must be a live handle; `out` a valid pointer to a handle slot.
 */
enum FredresStatus fredres_find_resonances(const struct FredresCoefficients *c,
                                           double r_min,
                                           double r_max,
                                           double tol,
                                           struct FredresResonanceSet **out);

/**
 * Number of located zeros (clusters included, each counted once).
 *
 * # Safety
 * `set` must be null or a live handle.
 */
uintptr_t fredres_resonance_set_len(const struct FredresResonanceSet *set);

/**
 * Winding count of the annulus boundary.
 *
 * # Safety
 * `set` must be null or a live handle.
 */
int64_t fredres_resonance_set_boundary_count(const struct FredresResonanceSet *set);

/**
 * # Safety
 * `set` must be a live handle; `out` a valid pointer.
 */
enum FredresStatus fredres_resonance_set_get(const struct FredresResonanceSet *set,
                                             uintptr_t index,
                                             struct FredresResonance *out);

/**
 * # Safety
 * `set` must be null or a handle from this library not yet freed.
 */
void fredres_resonance_set_free(struct FredresResonanceSet *set);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FREDRES_H */
