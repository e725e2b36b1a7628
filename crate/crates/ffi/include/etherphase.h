#ifndef ETHERPHASE_H
#define ETHERPHASE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum {
  EP_STATUS_OK = 0,
  EP_STATUS_NULL_POINTER = 1,
  EP_STATUS_INVALID_ARGUMENT = 2,
  EP_STATUS_DOMAIN = 3,
  EP_STATUS_NO_CONVERGENCE = 4,
  EP_STATUS_SINGULAR = 5,
  EP_STATUS_AMBIGUOUS = 6,
  EP_STATUS_NOT_IN_DOMAIN = 7,
  EP_STATUS_NUMERIC = 8,
  EP_STATUS_DIMENSION = 9,
  EP_STATUS_PANIC = 10,
} EpStatus;

/**
 * Opaque Ether structure.
 */
typedef struct EpStructure EpStructure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *ep_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ep_version(void);

/**
 * Builds a fixture by name with default parameters.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
EpStatus ep_structure_new(const char *name, EpStructure **out);

/**
 * Builds the fixture of a JSON run configuration (tolerances and fault
 * injection applied).
 *
 * # Safety
 * `config_json` must be a NUL-terminated string and `out` a valid pointer.
 */
EpStatus ep_structure_from_config(const char *config_json, EpStructure **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards; null is ignored.
 */
void ep_structure_free(EpStructure *s);

/**
 * Chart dimension `2n`.
 *
 * # Safety
 * `s` must be a live handle and `out` a valid pointer.
 */
EpStatus ep_structure_dim(const EpStructure *s, size_t *out);

/**
 * # Safety
 * `s` must be a live handle and `out` a valid pointer.
 */
EpStatus ep_structure_involutive(const EpStructure *s, bool *out);

/**
 * `H_x(z)` into `out[0..len]`.
 *
 * # Safety
 * `x`, `z` and `out` must hold `len` doubles, `len` being the dimension.
 */
EpStatus ep_hamiltonian(const EpStructure *s,
                        const double *x,
                        const double *z,
                        size_t len,
                        double *out);

/**
 * `s_x(z)` into `out[0..len]`.
 *
 * # Safety
 * `x`, `z` and `out` must hold `len` doubles, `len` being the dimension.
 */
EpStatus ep_reflection(const EpStructure *s,
                       const double *x,
                       const double *z,
                       size_t len,
                       double *out);

/**
 * Ether mid-point of `a` and `b` into `out[0..len]`.
 *
 * # Safety
 * `a`, `b` and `out` must hold `len` doubles, `len` being the dimension.
 */
EpStatus ep_midpoint(const EpStructure *s,
                     const double *a,
                     const double *b,
                     size_t len,
                     double *out);

/**
 * Triangle phase with mid-points `x`, `y`, `z`.
 *
 * # Safety
 * `x`, `y`, `z` must hold `len` doubles and `out` be a valid pointer.
 */
EpStatus ep_triangle_phase(const EpStructure *s,
                           const double *x,
                           const double *y,
                           const double *z,
                           size_t len,
                           double *out);

/**
 * Dynamic phase of the harmonic oscillator `|z|²/2` at time `t`.
 *
 * # Safety
 * `x` must hold `len` doubles and `out` be a valid pointer.
 */
EpStatus ep_oscillator_phase(const EpStructure *s,
                             const double *x,
                             size_t len,
                             double t,
                             double *out);

/**
 * Chord phase of the circle with centre `(cq, cp)` and radius `r` at `x[0..2]`.
 *
 * # Safety
 * `x` must hold 2 doubles and `out` be a valid pointer.
 */
EpStatus ep_circle_chord_phase(const EpStructure *s,
                               double cq,
                               double cp,
                               double r,
                               const double *x,
                               double *out);

/**
 * Runs the verification suite of a JSON run configuration and returns the
 * report as a JSON string in `out_json` and its exit code (0 or 1) in
 * `out_exit`. Configuration errors return a status instead.
 *
 * # Safety
 * `config_json` must be NUL-terminated; `out_json` and `out_exit` valid pointers.
 * The string must be released with [`ep_string_free`].
 */
EpStatus ep_verify(const char *config_json, char **out_json, int32_t *out_exit);

/**
 * # Safety
 * `s` must be a string returned by this library, or null.
 */
void ep_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ETHERPHASE_H */
