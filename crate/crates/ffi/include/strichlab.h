#ifndef STRICHLAB_H
#define STRICHLAB_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Values of the `sign` argument of `sl_billiard`.
 */
typedef enum SlSign {
  SL_SIGN_PLUS = 1,
  SL_SIGN_MINUS = -1,
} SlSign;

/**
 * Status codes; 0 is success.
 */
typedef enum SlStatus {
  SL_STATUS_OK = 0,
  SL_STATUS_NULL_POINTER = 1,
  SL_STATUS_INVALID_ARGUMENT = 2,
  SL_STATUS_NUMERIC = 3,
  SL_STATUS_BUFFER_TOO_SMALL = 4,
  SL_STATUS_PANIC = 5,
} SlStatus;

/**
 * Opaque: cusp field model built from an `SlParams`.
 */
typedef struct SlCuspModel SlCuspModel;

/**
 * Opaque: coupled scales (h, epsilon, c0) of one experiment.
 */
typedef struct SlParams SlParams;

/**
 * A point (y, t; eta, tau) of the boundary cotangent bundle.
 */
typedef struct SlPoint {
  double y;
  double t;
  double eta;
  double tau;
} SlPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message (NUL-terminated, truncated to `cap`) and
 * stores its full byte length in `len` when non-null.
 *
 * # Safety
 * `buf` must point to `cap` writable bytes or be null with `cap == 0`.
 */
enum SlStatus sl_last_error(char *buf, uintptr_t cap, uintptr_t *len);

/**
 * Ai(z).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SlStatus sl_airy_ai(double z, double *out);

/**
 * The first `count` positive zeros ω_k of Ai(-ω), increasing.
 *
 * # Safety
 * `out` must point to `count` writable doubles.
 */
enum SlStatus sl_airy_zeros(uintptr_t count, double *out);

/**
 * β(r), the loss exponent at the sharp wave pair (r > 4).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SlStatus sl_loss_exponent(double r, double *out);

/**
 * Applies the billiard map `n` times; `sign` is `SL_SIGN_PLUS` or `SL_SIGN_MINUS`.
 *
 * # Safety
 * `p` and `out` must be valid pointers.
 */
enum SlStatus sl_billiard(const struct SlPoint *p, int32_t sign, uint32_t n, struct SlPoint *out);

/**
 * Builds parameters with δ = (1 - epsilon)/2.
 *
 * # Safety
 * `out` must be a valid pointer; on success `*out` owns a handle.
 */
enum SlStatus sl_params_new(double h, double epsilon, double c0, struct SlParams **out);

/**
 * λ, a and the reflection count N of a parameter set.
 *
 * # Safety
 * `params` must come from `sl_params_new`; out-pointers may be null.
 */
enum SlStatus sl_params_scales(const struct SlParams *params,
                               double *lambda,
                               double *a,
                               uint32_t *n_reflections);

/**
 * # Safety
 * `params` must come from `sl_params_new` (or be null) and not be used afterwards.
 */
void sl_params_free(struct SlParams *params);

/**
 * Cusp model with default numerical settings.
 *
 * # Safety
 * `params` must be a live handle and `out` a valid pointer.
 */
enum SlStatus sl_cusp_new(const struct SlParams *params, struct SlCuspModel **out);

/**
 * # Safety
 * `model` must come from `sl_cusp_new` (or be null) and not be used afterwards.
 */
void sl_cusp_free(struct SlCuspModel *model);

/**
 * ‖u^n(t)‖_{L^r} over the model grid.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum SlStatus sl_cusp_norm(const struct SlCuspModel *model,
                           uint32_t n,
                           double t,
                           double r,
                           double *out);

/**
 * u^n(t) on the model grid, row-major in x, as separate real and imaginary
 * parts. With `cap` smaller than nx*ny (or null buffers) only the shape is
 * reported and the call returns `BufferTooSmall`.
 *
 * # Safety
 * `re` and `im` must point to `cap` writable doubles; `nx`, `ny` must be valid.
 */
enum SlStatus sl_cusp_field(const struct SlCuspModel *model,
                            uint32_t n,
                            double t,
                            double *re,
                            double *im,
                            uintptr_t cap,
                            uintptr_t *nx,
                            uintptr_t *ny);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STRICHLAB_H */
