#ifndef POLE_LADDER_H
#define POLE_LADDER_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PlStatus {
  PL_STATUS_OK = 0,
  PL_STATUS_NULL_POINTER = 1,
  PL_STATUS_INVALID_ARGUMENT = 2,
  PL_STATUS_DIMENSION_MISMATCH = 3,
  PL_STATUS_CUT_LOCUS = 4,
  PL_STATUS_NO_CONVERGENCE = 5,
  PL_STATUS_DOMAIN_ESCAPE = 6,
  PL_STATUS_UNSUPPORTED = 7,
  /**
   * Any other numerical failure; see the message.
   */
  PL_STATUS_NUMERICAL = 8,
  PL_STATUS_PANIC = 9,
} PlStatus;

/**
 * Opaque connection space.
 */
typedef struct PlSpace PlSpace;

/**
 * Ladder scheme selector.
 */
typedef uint32_t PlScheme;

#define PL_SCHEME_SCHILD 0

#define PL_SCHEME_POLE_V1 1

#define PL_SCHEME_POLE_V2 2

#define PL_SCHEME_POLE_ALT 3

#define PL_SCHEME_POLE_AVG 4

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a space from a registry name (`"sphere-2"`, `"bump2d"`, ...).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PlStatus pl_space_new(const char *name, struct PlSpace **out);

/**
 * Releases a space. Null is ignored.
 *
 * # Safety
 * `space` must come from [`pl_space_new`] and not be used afterwards.
 */
void pl_space_free(struct PlSpace *space);

/**
 * Number of doubles in a point or tangent vector; 0 for a null handle.
 *
 * # Safety
 * `space` must be null or a live handle.
 */
size_t pl_space_coord_len(const struct PlSpace *space);

/**
 * `out = exp_p(v)`.
 *
 * # Safety
 * Array arguments must hold `pl_space_coord_len(space)` doubles.
 */
enum PlStatus pl_exp(const struct PlSpace *space, const double *p, const double *v, double *out);

/**
 * `out = log_p(q)`.
 *
 * # Safety
 * Array arguments must hold `pl_space_coord_len(space)` doubles.
 */
enum PlStatus pl_log(const struct PlSpace *space, const double *p, const double *q, double *out);

/**
 * Reference transport of `u ∈ T_p` to `q` along the geodesic `[p, q]`.
 *
 * # Safety
 * Array arguments must hold `pl_space_coord_len(space)` doubles.
 */
enum PlStatus pl_transport_oracle(const struct PlSpace *space,
                                  const double *p,
                                  const double *q,
                                  const double *u,
                                  double *out);

/**
 * Midpoint of the geodesic `[p, q]`.
 *
 * # Safety
 * Array arguments must hold `pl_space_coord_len(space)` doubles.
 */
enum PlStatus pl_midpoint(const struct PlSpace *space,
                          const double *p,
                          const double *q,
                          double *out);

/**
 * `out = s_m(p)`.
 *
 * # Safety
 * Array arguments must hold `pl_space_coord_len(space)` doubles.
 */
enum PlStatus pl_geodesic_symmetry(const struct PlSpace *space,
                                   const double *m,
                                   const double *p,
                                   double *out);

/**
 * One ladder step carrying `u ∈ T_p` to `q`.
 *
 * # Safety
 * Array arguments must hold `pl_space_coord_len(space)` doubles.
 */
enum PlStatus pl_ladder_step(const struct PlSpace *space,
                             PlScheme scheme,
                             const double *p,
                             const double *q,
                             const double *u,
                             double *out);

/**
 * Transport of `u ∈ T_p` to `q` with `n_rungs` ladder rungs along `[p, q]`.
 *
 * # Safety
 * Array arguments must hold `pl_space_coord_len(space)` doubles.
 */
enum PlStatus pl_transport_along_geodesic(const struct PlSpace *space,
                                          PlScheme scheme,
                                          const double *p,
                                          const double *q,
                                          const double *u,
                                          size_t n_rungs,
                                          double *out);

/**
 * Copies the calling thread's last error message into `buf` (truncated,
 * always NUL-terminated when `len > 0`). Returns the full message length
 * without the terminator.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t pl_last_error_message(char *buf, size_t len);

/**
 * Static name of a status code.
 */
const char *pl_status_name(enum PlStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLE_LADDER_H */
