/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef ABLEAK_H
#define ABLEAK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AbleakStatus {
  ABLEAK_STATUS_OK = 0,
  ABLEAK_STATUS_NULL_POINTER = 1,
  ABLEAK_STATUS_INVALID_ENTRY = 2,
  ABLEAK_STATUS_NOT_STOCHASTIC = 3,
  ABLEAK_STATUS_SHAPE_ERROR = 4,
  ABLEAK_STATUS_INVALID_ORDER = 5,
  ABLEAK_STATUS_INVALID_PARAMETER = 6,
  ABLEAK_STATUS_NUMERICAL_FAILURE = 7,
  ABLEAK_STATUS_DEGENERATE_INPUT = 8,
  ABLEAK_STATUS_BUDGET_EXCEEDED = 9,
  ABLEAK_STATUS_PARSE_ERROR = 10,
  ABLEAK_STATUS_IO_ERROR = 11,
  // The value was computed but an optimizer run stopped short of its
  // tolerance; the report is filled in and the value is a lower bound.
  ABLEAK_STATUS_NOT_CONVERGED = 12,
  ABLEAK_STATUS_PANIC = 13,
} AbleakStatus;

// Opaque channel handle.
typedef struct AbleakChannel AbleakChannel;

// Result of a leakage computation.
typedef struct AbleakReport {
  // Leakage in nats; `INFINITY` when unbounded.
  double value_nats;
  // Maximizing input of the outer maximum over x'.
  size_t maximizing_x_prime;
  // Optimizer iterations for the maximizing x' (0 for closed forms).
  size_t iterations;
  // Frank-Wolfe gap at termination (0 for closed forms).
  double certified_gap;
  bool converged;
} AbleakReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Static description of a status code. Never null.
const char *ableak_status_message(enum AbleakStatus status);

// Copies the calling thread's last error message into `buffer` as a
// NUL-terminated string, truncating to `len - 1` bytes. Returns the buffer
// size needed for the full message, including the terminator. `buffer` may be
// null when `len` is 0.
//
// # Safety
// `buffer` must be valid for `len` bytes of writes.
size_t ableak_last_error_message(char *buffer, size_t len);

// Builds a channel from a row-major `rows x cols` matrix. Rows within
// `tolerance` of summing to one are renormalized.
//
// # Safety
// `probs` must point to `rows * cols` doubles and `out` must be valid for one
// write. On success `*out` owns a handle to release with
// `ableak_channel_free`.
enum AbleakStatus ableak_channel_new(const double *probs,
                                     size_t rows,
                                     size_t cols,
                                     double tolerance,
                                     struct AbleakChannel **out);

// Reads a channel CSV file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` valid for one write.
enum AbleakStatus ableak_channel_from_csv(const char *path,
                                          double tolerance,
                                          struct AbleakChannel **out);

// Releases a channel. Null is ignored.
//
// # Safety
// `channel` must be null or a live handle from this library; it must not be
// used afterwards.
void ableak_channel_free(struct AbleakChannel *channel);

// Number of inputs, or 0 for a null handle.
//
// # Safety
// `channel` must be null or a live handle.
size_t ableak_channel_rows(const struct AbleakChannel *channel);

// Number of outputs, or 0 for a null handle.
//
// # Safety
// `channel` must be null or a live handle.
size_t ableak_channel_cols(const struct AbleakChannel *channel);

// Maximal alpha,beta-leakage. When `p_tilde` is non-null and a maximizing
// distribution exists, it is written there (`rows` doubles); otherwise the
// buffer is left untouched.
//
// # Safety
// `channel` must be a live handle, `report` valid for one write, and
// `p_tilde` null or valid for `rows` writes.
enum AbleakStatus ableak_maximal_alpha_beta_leakage(const struct AbleakChannel *channel,
                                                    double alpha,
                                                    double beta,
                                                    double tolerance,
                                                    struct AbleakReport *report,
                                                    double *p_tilde);

// Maximal alpha-leakage (`beta = 1`); `alpha = INFINITY` gives maximal
// leakage.
//
// # Safety
// `channel` must be a live handle and `report` valid for one write.
enum AbleakStatus ableak_maximal_alpha_leakage(const struct AbleakChannel *channel,
                                               double alpha,
                                               double tolerance,
                                               struct AbleakReport *report);

// Leakage at `beta = alpha / (1 - tau (1 - alpha))` for `tau` in `[0, 1]`.
//
// # Safety
// `channel` must be a live handle and `report` valid for one write.
enum AbleakStatus ableak_alpha_tau_leakage(const struct AbleakChannel *channel,
                                           double alpha,
                                           double tau,
                                           double tolerance,
                                           struct AbleakReport *report);

// Maximal leakage in nats.
//
// # Safety
// `channel` must be a live handle and `out` valid for one write.
enum AbleakStatus ableak_maximal_leakage(const struct AbleakChannel *channel, double *out);

// Local differential privacy in nats; `INFINITY` when unbounded.
//
// # Safety
// `channel` must be a live handle and `out` valid for one write.
enum AbleakStatus ableak_ldp(const struct AbleakChannel *channel, double *out);

// Local Renyi differential privacy of finite order `alpha > 1`.
//
// # Safety
// `channel` must be a live handle and `out` valid for one write.
enum AbleakStatus ableak_lrdp(const struct AbleakChannel *channel, double alpha, double *out);

// The `alpha = INFINITY` member for finite `beta >= 1`.
//
// # Safety
// `channel` must be a live handle and `out` valid for one write.
enum AbleakStatus ableak_lrdp_variant(const struct AbleakChannel *channel,
                                      double beta,
                                      double *out);

// Shannon capacity in nats; `tolerance` bounds the width of the
// Blahut-Arimoto bracket (0 selects 1e-12).
//
// # Safety
// `channel` must be a live handle and `out` valid for one write.
enum AbleakStatus ableak_shannon_capacity(const struct AbleakChannel *channel,
                                          double tolerance,
                                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ABLEAK_H */
