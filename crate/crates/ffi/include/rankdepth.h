#ifndef RANKDEPTH_H
#define RANKDEPTH_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum RdStatus {
  RD_STATUS_OK = 0,
  RD_STATUS_NULL_POINTER = 1,
  RD_STATUS_INVALID_ARGUMENT = 2,
  RD_STATUS_SIZE_MISMATCH = 3,
  RD_STATUS_INVALID_PERMUTATION = 4,
  RD_STATUS_EMPTY_SAMPLE = 5,
  RD_STATUS_NOT_TRANSITIVE = 6,
  RD_STATUS_NOT_STRICT = 7,
  RD_STATUS_TOO_LARGE = 8,
  RD_STATUS_PARSE = 9,
  RD_STATUS_IO = 10,
  RD_STATUS_PANIC = 11,
} RdStatus;

typedef enum RdMetric {
  RD_METRIC_KENDALL = 0,
  RD_METRIC_RHO = 1,
  RD_METRIC_FOOTRULE = 2,
  RD_METRIC_HAMMING = 3,
} RdMetric;

typedef enum RdTransitivity {
  RD_TRANSITIVITY_SST = 0,
  RD_TRANSITIVITY_ST_WITH_TIES = 1,
  RD_TRANSITIVITY_NOT_ST = 2,
} RdTransitivity;

// Opaque pairwise preference matrix.
typedef struct RdPairwise RdPairwise;

// Opaque ranking sample.
typedef struct RdSample RdSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *rd_version(void);

// Message for the last failed call on this thread, or NULL. Valid until the
// next call into the library from the same thread.
const char *rd_last_error_message(void);

// Builds a sample from `count` rankings of `n_items` items stored row by row.
//
// # Safety
// `ranks` must point to `count * n_items` values and `out` must be writable.
enum RdStatus rd_sample_new(const size_t *ranks,
                            size_t n_items,
                            size_t count,
                            struct RdSample **out);

// Parses CSV text with one ranking per line.
//
// # Safety
// `text` must be a NUL-terminated string and `out` must be writable.
enum RdStatus rd_sample_from_csv(const char *text,
                                 bool ordering,
                                 bool one_based,
                                 struct RdSample **out);

// Draws `count` rankings from a Mallows model. A NULL `center` means the
// identity.
//
// # Safety
// `center` must be NULL or point to `n_items` values; `out` must be writable.
enum RdStatus rd_sample_mallows(const size_t *center,
                                size_t n_items,
                                double phi,
                                size_t count,
                                uint64_t seed,
                                struct RdSample **out);

// # Safety
// `sample` must come from this library and not have been freed already.
void rd_sample_free(struct RdSample *sample);

// Number of rankings, 0 for NULL.
//
// # Safety
// `sample` must be NULL or a live handle.
size_t rd_sample_len(const struct RdSample *sample);

// Number of items per ranking, 0 for NULL.
//
// # Safety
// `sample` must be NULL or a live handle.
size_t rd_sample_n_items(const struct RdSample *sample);

// Copies ranking `index` into `out_ranks`, which holds `n_items` values.
//
// # Safety
// `sample` must be a live handle and `out_ranks` must hold `n_items` values.
enum RdStatus rd_sample_get(const struct RdSample *sample,
                            size_t index,
                            size_t *out_ranks,
                            size_t n_items);

// Empirical depth of one ranking relative to the sample.
//
// # Safety
// `sample` must be a live handle, `ranks` must hold `n_items` values and
// `out` must be writable.
enum RdStatus rd_depth(const struct RdSample *sample,
                       const size_t *ranks,
                       size_t n_items,
                       enum RdMetric m,
                       double *out);

// Depth of every ranking in the sample, written to `out` (length `len`).
//
// # Safety
// `sample` must be a live handle and `out` must hold `len` values.
enum RdStatus rd_sample_depths(const struct RdSample *sample,
                               enum RdMetric m,
                               double *out,
                               size_t len);

// Empirical pairwise matrix of a sample.
//
// # Safety
// `sample` must be a live handle and `out` must be writable.
enum RdStatus rd_pairwise_new(const struct RdSample *sample, struct RdPairwise **out);

// # Safety
// `pw` must come from this library and not have been freed already.
void rd_pairwise_free(struct RdPairwise *pw);

// Probability that item `i` is ranked before item `j`.
//
// # Safety
// `pw` must be a live handle and `out` must be writable.
enum RdStatus rd_pairwise_get(const struct RdPairwise *pw, size_t i, size_t j, double *out);

// Transitivity status and number of majority 3-cycles, with tolerance `eps`.
//
// # Safety
// `pw` must be a live handle; `status` and `cycles` must be writable.
enum RdStatus rd_pairwise_transitivity(const struct RdPairwise *pw,
                                       double eps,
                                       enum RdTransitivity *status,
                                       size_t *cycles);

// Kemeny median of a strictly transitive matrix, as 0-based ranks.
//
// # Safety
// `pw` must be a live handle and `out_ranks` must hold `n_items` values.
enum RdStatus rd_kemeny_sst(const struct RdPairwise *pw, size_t *out_ranks, size_t n_items);

// Trims least deep rankings until the sample is stochastically transitive
// (`strict` selects strict transitivity). Writes a new sample handle and
// the number of trimming iterations.
//
// # Safety
// `sample` must be a live handle; `out` and `iterations` must be writable.
enum RdStatus rd_trim(const struct RdSample *sample,
                      enum RdMetric m,
                      bool strict,
                      struct RdSample **out,
                      size_t *iterations);

// Two-sided Wilcoxon rank-sum test of `x` against `y`.
//
// # Safety
// `x` and `y` must hold `nx` and `ny` values; outputs must be writable.
enum RdStatus rd_wilcoxon(const double *x,
                          size_t nx,
                          const double *y,
                          size_t ny,
                          double *statistic,
                          double *p_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RANKDEPTH_H */
