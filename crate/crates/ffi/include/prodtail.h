#ifndef PRODTAIL_H
#define PRODTAIL_H

/* Generated by cbindgen from crates/ffi. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PtStatus {
  PT_STATUS_OK = 0,
  PT_STATUS_INVALID_PARAMETER = 1,
  PT_STATUS_INVALID_VERTEX = 2,
  PT_STATUS_INCONSISTENCY = 3,
  PT_STATUS_NULL_POINTER = 4,
  PT_STATUS_IO = 5,
  PT_STATUS_INTERNAL = 6,
} PtStatus;

typedef enum PtMethod {
  PT_METHOD_DIRECT = 0,
  PT_METHOD_COMPOUND = 1,
  PT_METHOD_BETA = 2,
} PtMethod;

/**
 * Opaque random stream.
 */
typedef struct PtStream PtStream;

/**
 * Opaque uniform-attachment tree with its cached centrality table.
 */
typedef struct PtTree PtTree;

typedef struct PtXSample {
  double value;
  double log_value;
  uint64_t factor_count;
} PtXSample;

/**
 * A nonnegative value and its natural log.
 */
typedef struct PtLogProb {
  double p;
  double ln_p;
} PtLogProb;

typedef struct PtPoissonTailBounds {
  double lower;
  double ln_lower;
  /**
   * Meaningful only when `has_upper` is true.
   */
  double upper;
  double ln_upper;
  bool has_upper;
} PtPoissonTailBounds;

typedef struct PtStirlingBounds {
  double lower;
  double upper;
  double exact;
  double ln_lower;
  double ln_upper;
  double ln_exact;
} PtStirlingBounds;

typedef struct PtBoundReport {
  double t;
  double lambda;
  double exact;
  double log_exact;
  double bound_optimal;
  double log_bound_optimal;
  double bound_moment_best_alpha;
  double legacy_bound;
  double log_legacy_bound;
  double asymptotic_lower;
  double log_asymptotic_lower;
  double asymptotic_upper;
  double log_asymptotic_upper;
} PtBoundReport;

typedef struct PtTrialRecord {
  size_t n;
  size_t k;
  size_t trials;
  size_t successes;
  double success_rate;
  /**
   * Meaningful only when `has_std_error` is true (more than one trial).
   */
  double std_error;
  bool has_std_error;
} PtTrialRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL after a
 * success. Valid until the next call into this library on the same thread.
 */
const char *pt_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pt_version(void);

struct PtStream *pt_stream_new(uint64_t seed);

/**
 * Child stream named by `(label, index)`; NULL if `stream` or `label` is NULL.
 *
 * # Safety
 * `stream` must come from this library and `label` must be NUL-terminated.
 */
struct PtStream *pt_stream_derive(const struct PtStream *stream, const char *label, uint64_t index);

/**
 * # Safety
 * `stream` must be NULL or a handle from this library not yet freed.
 */
void pt_stream_free(struct PtStream *stream);

/**
 * One draw of X. `beta_shape` is used only by `PT_METHOD_BETA`.
 *
 * # Safety
 * `stream` must be a live handle and `out` writable.
 */
enum PtStatus pt_sample_x(struct PtStream *stream,
                          enum PtMethod method,
                          double lambda,
                          double beta_shape,
                          struct PtXSample *out);

/**
 * `count` draws of X into `out[0..count]`.
 *
 * # Safety
 * `stream` must be a live handle and `out` must hold `count` elements.
 */
enum PtStatus pt_sample_many(struct PtStream *stream,
                             enum PtMethod method,
                             double lambda,
                             double beta_shape,
                             size_t count,
                             struct PtXSample *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum PtStatus pt_moment_exact(double order, double lambda, double *out);

/**
 * Exact `P(X <= t)`; 0 for `t <= 0` and 1 for `t >= 1`.
 *
 * # Safety
 * `out` must be writable.
 */
enum PtStatus pt_tail_exact(double t, double lambda, struct PtLogProb *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum PtStatus pt_tail_bound_moment(double t, double lambda, double alpha, struct PtLogProb *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum PtStatus pt_optimal_alpha(double t, double lambda, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum PtStatus pt_tail_bound_optimal(double t, double lambda, struct PtLogProb *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum PtStatus pt_tail_bound_legacy(double t, double *out);

/**
 * `P(M_mu >= M_nu)`, or `P(M_mu > M_nu)` when `strict`.
 *
 * # Safety
 * `out` must be writable.
 */
enum PtStatus pt_poisson_ge_exact(double mu, double nu, bool strict, struct PtLogProb *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum PtStatus pt_poisson_ge_bound(double mu, double nu, struct PtLogProb *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum PtStatus pt_asymptotic_lower(double t, double lambda, struct PtLogProb *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum PtStatus pt_asymptotic_upper(double t, double lambda, struct PtLogProb *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum PtStatus pt_poisson_tail_bounds(uint64_t n, double mu, struct PtPoissonTailBounds *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum PtStatus pt_stirling_ratio_bounds(uint64_t n, struct PtStirlingBounds *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum PtStatus pt_bound_report(double t, double lambda, struct PtBoundReport *out);

/**
 * Grows a uniform attachment tree with `n` vertices.
 *
 * # Safety
 * `stream` must be a live handle and `out` writable.
 */
enum PtStatus pt_tree_grow(size_t n, struct PtStream *stream, struct PtTree **out);

/**
 * Builds a tree from the parent labels of vertices `2..=len+1`.
 *
 * # Safety
 * `parents` must hold `len` elements (may be NULL when `len` is 0).
 */
enum PtStatus pt_tree_from_parents(const size_t *parents, size_t len, struct PtTree **out);

/**
 * Vertex count, or 0 for a NULL handle.
 *
 * # Safety
 * `tree` must be NULL or a live handle.
 */
size_t pt_tree_vertex_count(const struct PtTree *tree);

/**
 * # Safety
 * `tree` must be a live handle and `out` writable.
 */
enum PtStatus pt_tree_log_phi_direct(const struct PtTree *tree, size_t vertex, double *out);

/**
 * Writes `ln phi` of vertices `1..=n` into `out[0..n]`; `len` must be at least `n`.
 *
 * # Safety
 * `tree` must be a live handle and `out` must hold `len` elements.
 */
enum PtStatus pt_tree_log_phi_all(const struct PtTree *tree, double *out, size_t len);

/**
 * Writes the `k` most central vertex labels into `out[0..k]`.
 *
 * # Safety
 * `tree` must be a live handle and `out` must hold `k` elements.
 */
enum PtStatus pt_tree_top_k(const struct PtTree *tree, size_t k, size_t *out);

/**
 * # Safety
 * `tree` must be NULL or a handle from this library not yet freed.
 */
void pt_tree_free(struct PtTree *tree);

/**
 * Root-finding success rate over `trials` trees of size `n`. Trials use
 * substreams of `stream`, which is not advanced.
 *
 * # Safety
 * `stream` must be a live handle and `out` writable.
 */
enum PtStatus pt_root_finding_trial(size_t n,
                                    size_t k,
                                    size_t trials,
                                    const struct PtStream *stream,
                                    struct PtTrialRecord *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRODTAIL_H */
