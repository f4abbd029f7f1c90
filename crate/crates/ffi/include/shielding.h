#ifndef SHIELDING_H
#define SHIELDING_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define SHIELDING_OK 0

// A required pointer argument was null.
#define SHIELDING_ERR_NULL_POINTER -1

// A Rust panic was caught at the boundary.
#define SHIELDING_ERR_PANIC -2

// An output buffer is too short.
#define SHIELDING_ERR_BUFFER_TOO_SMALL -3

// An index is out of range.
#define SHIELDING_ERR_OUT_OF_RANGE -4

// A list of points in the complex plane.
typedef struct ShieldingPoints ShieldingPoints;

// Discrete scattering data: poles in the upper half-plane with their norming constants.
typedef struct ShieldingSpectrum ShieldingSpectrum;

// Complex number with the memory layout of C99 `double _Complex`.
typedef struct ShieldingComplex {
  double re;
  double im;
} ShieldingComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or null if the last
// call succeeded. Valid until the next library call on the same thread.
const char *shielding_last_error(void);

// Library version as a static NUL-terminated string.
const char *shielding_version(void);

// Builds scattering data from `len` poles `z` and norming constants `c`.
//
// # Safety
// `z` and `c` must point to `len` readable elements; `out` must be writable.
int32_t shielding_spectrum_new(const struct ShieldingComplex *z,
                               const struct ShieldingComplex *c,
                               size_t len,
                               struct ShieldingSpectrum **out);

// # Safety
// `spectrum` must be null or a handle from [`shielding_spectrum_new`] not yet freed.
void shielding_spectrum_free(struct ShieldingSpectrum *spectrum);

// Number of poles, or 0 for a null handle.
//
// # Safety
// `spectrum` must be null or a live handle.
size_t shielding_spectrum_len(const struct ShieldingSpectrum *spectrum);

// `psi(x, t)`. `out_condition` may be null; otherwise it receives the
// condition estimate of the linear solve.
//
// # Safety
// `spectrum` must be a live handle; `out_psi` must be writable.
int32_t shielding_evaluate_psi(const struct ShieldingSpectrum *spectrum,
                               double x,
                               double t,
                               struct ShieldingComplex *out_psi,
                               double *out_condition);

// `psi` on a uniform `nx` by `nt` grid, written row-major with `t` outer.
// `out` must hold at least `nx * nt` values (`out_len`).
//
// # Safety
// `spectrum` must be a live handle; `out` must point to `out_len` writable elements.
int32_t shielding_evaluate_field(const struct ShieldingSpectrum *spectrum,
                                 double x_min,
                                 double x_max,
                                 size_t nx,
                                 double t_min,
                                 double t_max,
                                 size_t nt,
                                 struct ShieldingComplex *out,
                                 size_t out_len);

// The 2 x 2 matrix `Y(z; x, t)`, written row-major into `out[4]`.
//
// # Safety
// `spectrum` must be a live handle; `out` must point to 4 writable elements.
int32_t shielding_evaluate_y(const struct ShieldingSpectrum *spectrum,
                             double x,
                             double t,
                             struct ShieldingComplex z,
                             struct ShieldingComplex *out);

// Closed-form one-soliton with pole `z0` and norming constant `c0`.
//
// # Safety
// `out` must be writable.
int32_t shielding_one_soliton(struct ShieldingComplex z0,
                              struct ShieldingComplex c0,
                              double x,
                              double t,
                              struct ShieldingComplex *out);

// Fekete points for the weight `|w|^2` (raw scale). Fails with the
// max-iterations code if the descent does not reach `tol`.
//
// # Safety
// `out` must be writable.
int32_t shielding_fekete_points(size_t n,
                                double tol,
                                size_t max_iter,
                                uint64_t seed,
                                struct ShieldingPoints **out);

// One Ginibre configuration of `n` points from a Metropolis chain with the
// default schedule.
//
// # Safety
// `out` must be writable.
int32_t shielding_ginibre_sample(size_t n, uint64_t seed, struct ShieldingPoints **out);

// Number of points, or 0 for a null handle.
//
// # Safety
// `points` must be null or a live handle.
size_t shielding_points_len(const struct ShieldingPoints *points);

// # Safety
// `points` must be a live handle; `out` must be writable.
int32_t shielding_points_get(const struct ShieldingPoints *points,
                             size_t index,
                             struct ShieldingComplex *out);

// Copies all points into `out`, which must hold at least `out_len >= len` values.
//
// # Safety
// `points` must be a live handle; `out` must point to `out_len` writable elements.
int32_t shielding_points_copy(const struct ShieldingPoints *points,
                              struct ShieldingComplex *out,
                              size_t out_len);

// # Safety
// `points` must be null or a live handle not yet freed.
void shielding_points_free(struct ShieldingPoints *points);

// Complete elliptic integral of the first kind `K(m)`, parameter convention.
//
// # Safety
// `out` must be writable.
int32_t shielding_elliptic_k(double m, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHIELDING_H */
