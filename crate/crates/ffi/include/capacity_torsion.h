#ifndef CAPACITY_TORSION_H
#define CAPACITY_TORSION_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes.
 */
typedef enum CtStatus {
  CT_STATUS_OK = 0,
  CT_STATUS_NULL_POINTER = 1,
  CT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The operation needs a larger dimension (capacity needs d ≥ 3).
   */
  CT_STATUS_DIMENSION = 3,
  /**
   * Quadrature, hull or enclosing-ellipsoid failure.
   */
  CT_STATUS_NUMERIC = 4,
  CT_STATUS_NOT_APPLICABLE = 5,
  CT_STATUS_UNSUPPORTED_BODY = 6,
  CT_STATUS_PANIC = 7,
} CtStatus;

/**
 * Opaque body handle.
 */
typedef struct CtBody CtBody;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread, or an empty
 * string. Valid until the next library call on the thread.
 */
const char *ct_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ct_version(void);

/**
 * Parses a body document (`{"kind": "ellipsoid", "axes": [...]}` and so
 * on). `default_dim` is used for balls without `dim` or `center`; pass 0
 * for none.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CtStatus ct_body_from_json(const char *json, size_t default_dim, struct CtBody **out);

/**
 * Centred ellipsoid with the given semi-axes.
 *
 * # Safety
 * `axes` must point to `d` doubles and `out` must be valid.
 */
enum CtStatus ct_body_ellipsoid(const double *axes, size_t d, struct CtBody **out);

/**
 * Centred ball of radius `radius` in dimension `d`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CtStatus ct_body_ball(size_t d, double radius, struct CtBody **out);

/**
 * Convex hull of `n` points of dimension `d`, stored row by row.
 *
 * # Safety
 * `points` must point to `n * d` doubles and `out` must be valid.
 */
enum CtStatus ct_body_polytope(const double *points, size_t n, size_t d, struct CtBody **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `body` must come from a `ct_body_*` constructor and not be used again.
 */
void ct_body_free(struct CtBody *body);

/**
 * # Safety
 * `body` must be a live handle and `out` valid.
 */
enum CtStatus ct_body_dim(const struct CtBody *body, size_t *out);

/**
 * # Safety
 * `body` must be a live handle and `out` valid.
 */
enum CtStatus ct_body_volume(const struct CtBody *body, double *out);

/**
 * The elliptic integral 𝔢(a) with the default quadrature settings.
 *
 * # Safety
 * `axes` must point to `d` doubles and `out` must be valid.
 */
enum CtStatus ct_efrak(const double *axes, size_t d, double *out);

/**
 * Newtonian capacity of the closed ellipsoid (d ≥ 3).
 *
 * # Safety
 * `axes` must point to `d` doubles and `out` must be valid.
 */
enum CtStatus ct_cap_ellipsoid(const double *axes, size_t d, double *out);

/**
 * Torsional rigidity of the ellipsoid.
 *
 * # Safety
 * `axes` must point to `d` doubles and `out` must be valid.
 */
enum CtStatus ct_torsion_ellipsoid(const double *axes, size_t d, double *out);

/**
 * G_q of the ellipsoid (d ≥ 3).
 *
 * # Safety
 * `axes` must point to `d` doubles and `out` must be valid.
 */
enum CtStatus ct_g_q_ellipsoid(const double *axes, size_t d, double q, double *out);

/**
 * G_q of the unit ball in dimension `d ≥ 3`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CtStatus ct_g_q_ball(size_t d, double q, double *out);

/**
 * H_q of the ellipse with semi-axes `a1`, `a2`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CtStatus ct_h_q_ellipse(double a1, double a2, double q, double *out);

/**
 * Certified interval for G_q of a convex body.
 *
 * # Safety
 * `body` must be a live handle; `lower` and `upper` must be valid.
 */
enum CtStatus ct_sandwich_g_q(const struct CtBody *body, double q, double *lower, double *upper);

/**
 * Walk-on-spheres capacity estimate with default shell and radii.
 *
 * # Safety
 * `body` must be a live handle; `value` and `std_error` must be valid.
 */
enum CtStatus ct_wos_capacity(const struct CtBody *body,
                              uint64_t walkers,
                              uint64_t seed,
                              double *value,
                              double *std_error);

/**
 * Walk-on-spheres torsion estimate with the default shell.
 *
 * # Safety
 * `body` must be a live handle; `value` and `std_error` must be valid.
 */
enum CtStatus ct_wos_torsion(const struct CtBody *body,
                             uint64_t walkers,
                             uint64_t seed,
                             double *value,
                             double *std_error);

/**
 * Writes the body document as JSON into `buf` (NUL-terminated, at most
 * `len` bytes) and the required size including the NUL into `needed`.
 * Returns `InvalidArgument` when `buf` is too small; `buf` may be null to
 * query the size.
 *
 * # Safety
 * `body` must be a live handle, `buf` valid for `len` bytes or null, and
 * `needed` valid.
 */
enum CtStatus ct_body_to_json(const struct CtBody *body, char *buf, size_t len, size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAPACITY_TORSION_H */
