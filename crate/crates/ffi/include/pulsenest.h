#ifndef PULSENEST_H
#define PULSENEST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PnErrorKind {
  PN_ERROR_KIND_AMPLITUDE = 0,
  PN_ERROR_KIND_OFF_RESONANCE = 1,
} PnErrorKind;

typedef enum PnFamily {
  PN_FAMILY_FN = 0,
  PN_FAMILY_SYMMETRIC5 = 1,
} PnFamily;

typedef enum PnFrame {
  PN_FRAME_APPLIED = 0,
  PN_FRAME_TOGGLING = 1,
} PnFrame;

typedef enum PnStatus {
  PN_STATUS_OK = 0,
  PN_STATUS_NULL_POINTER = 1,
  PN_STATUS_INVALID_ARGUMENT = 2,
  // Numerical gate failure, e.g. an empty fit window.
  PN_STATUS_NUMERICAL = 3,
  PN_STATUS_BUFFER_TOO_SMALL = 4,
  PN_STATUS_PANIC = 5,
} PnStatus;

// Opaque sequence handle.
typedef struct PnSequence PnSequence;

// First- and second-order error terms per unit δ = πε, as Pauli coefficients.
typedef struct PnErrorTerms {
  double delta1_x;
  double delta1_y;
  double delta1_z;
  // The σz coefficient; the xy part of the second-order term is zero.
  double delta2_z;
} PnErrorTerms;

// Result of [`pn_infidelity_order`].
typedef struct PnOrderEstimate {
  double exponent;
  int64_t rounded_order;
  double coefficient;
  double window_lo;
  double window_hi;
  double residual;
  uint32_t precision;
  size_t points;
  // Non-zero when the residual is below the reliability gate.
  uint8_t gate_passed;
} PnOrderEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next `pn_*` call on this thread.
const char *pn_last_error(void);

// Builds a family member: `F_n` (`PN_FAMILY_FN`) or the symmetric
// five-pulse sequence nested `n` times. `sign` ≥ 0 selects the `+` branch.
//
// # Safety
// `out` must be valid for writes.
enum PnStatus pn_sequence_family(enum PnFamily family,
                                 uint32_t n,
                                 int32_t sign,
                                 struct PnSequence **out);

// Wraps `len` phases (radians) given in `frame`.
//
// # Safety
// `phases` must point to `len` readable doubles; `out` must be valid for writes.
enum PnStatus pn_sequence_from_phases(const double *phases,
                                      size_t len,
                                      enum PnFrame frame,
                                      struct PnSequence **out);

// Nests `inner` inside `outer` (every outer pulse replaced by a copy of
// `inner`, combined in the toggling frame). Both handles stay owned by the caller.
//
// # Safety
// `outer` and `inner` must be live handles; `out` must be valid for writes.
enum PnStatus pn_sequence_nest(const struct PnSequence *outer,
                               const struct PnSequence *inner,
                               struct PnSequence **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `seq` must be null or a handle not yet freed.
void pn_sequence_free(struct PnSequence *seq);

// Number of pulses, or 0 for a null handle.
//
// # Safety
// `seq` must be null or a live handle.
size_t pn_sequence_len(const struct PnSequence *seq);

// Copies the phases in `frame` into `buf`. `*written` receives the length;
// when `cap` is too small nothing is copied and `PN_STATUS_BUFFER_TOO_SMALL`
// is returned, so callers may query the size with `cap = 0`.
//
// # Safety
// `buf` must have room for `cap` doubles; `written` must be valid for writes.
enum PnStatus pn_sequence_phases(const struct PnSequence *seq,
                                 enum PnFrame frame,
                                 double *buf,
                                 size_t cap,
                                 size_t *written);

// Propagator of the sequence with amplitude error `eps` and off-resonance
// `f`, as `[re00, im00, re01, im01, re10, im10, re11, im11]`.
//
// # Safety
// `out` must point to 8 writable doubles.
enum PnStatus pn_sequence_propagator(const struct PnSequence *seq,
                                     double eps,
                                     double f,
                                     double *out);

// Fidelity of the error-prone sequence with the ideal NOT gate `π_0`.
//
// # Safety
// `out` must be valid for writes.
enum PnStatus pn_sequence_fidelity(const struct PnSequence *seq, double eps, double f, double *out);

// Fidelity over `eps[i] × f[j]`, written row-major (`i * n_f + j`) into
// `out`, which must hold `n_eps * n_f` doubles.
//
// # Safety
// `eps`, `f` and `out` must point to arrays of the stated sizes.
enum PnStatus pn_sweep(const struct PnSequence *seq,
                       const double *eps,
                       size_t n_eps,
                       const double *f,
                       size_t n_f,
                       double *out);

// Analytic first- and second-order amplitude-error terms per unit δ.
//
// # Safety
// `out` must be valid for writes.
enum PnStatus pn_sequence_error_terms(const struct PnSequence *seq, struct PnErrorTerms *out);

// Fits the infidelity exponent at `digits` significant digits (≤ 16 runs
// in double precision). Returns `PN_STATUS_NUMERICAL` when the precision
// cannot resolve the order; the estimate is still filled when the fit ran
// but missed the residual gate, with `gate_passed = 0`.
//
// # Safety
// `out` must be valid for writes.
enum PnStatus pn_infidelity_order(const struct PnSequence *seq,
                                  enum PnErrorKind kind,
                                  uint32_t digits,
                                  struct PnOrderEstimate *out);

// Library version, static storage.
const char *pn_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PULSENEST_H */
