#ifndef MIMO_FAS_H
#define MIMO_FAS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum MfasStatus {
  MFAS_STATUS_OK = 0,
  MFAS_STATUS_NULL_POINTER = 1,
  MFAS_STATUS_INVALID_UTF8 = 2,
  MFAS_STATUS_DOMAIN = 3,
  MFAS_STATUS_NUMERICAL_RANK = 4,
  MFAS_STATUS_TOO_MANY_COMBINATIONS = 5,
  MFAS_STATUS_INFEASIBLE = 6,
  MFAS_STATUS_INTERVAL = 7,
  MFAS_STATUS_CONFIG = 8,
  MFAS_STATUS_IO = 9,
  MFAS_STATUS_BUFFER_TOO_SMALL = 10,
  MFAS_STATUS_OUT_OF_RANGE = 11,
  MFAS_STATUS_PANIC = 12,
} MfasStatus;

// Port selection strategy.
typedef enum MfasStrategy {
  // Rank-revealing QR selection.
  MFAS_STRATEGY_QR = 0,
  // Exhaustive search with the default combination limit.
  MFAS_STRATEGY_EXHAUSTIVE = 1,
  // Norm-greedy selection with half-wavelength separation.
  MFAS_STRATEGY_GREEDY = 2,
  MFAS_STRATEGY_RANDOM = 3,
} MfasStrategy;

// Which tradeoff curve [`mfas_dmt`] evaluates.
typedef enum MfasDmtKind {
  // Fluid surfaces; `a`, `b` are the effective ranks.
  MFAS_DMT_KIND_FLUID_SURFACE = 0,
  // Half-wavelength antenna selection; `a`, `b` are ignored and the
  // apertures come from `aperture_rx`/`aperture_tx`.
  MFAS_DMT_KIND_ANTENNA_SELECTION = 1,
  // Classical i.i.d. MIMO; `a`, `b` are the antenna counts.
  MFAS_DMT_KIND_TRADITIONAL = 2,
} MfasDmtKind;

// Opaque parsed campaign configuration.
typedef struct MfasCampaign MfasCampaign;

// Opaque link handle.
typedef struct MfasLink MfasLink;

// Opaque campaign results.
typedef struct MfasResults MfasResults;

// Port grid of one side: `n1 x n2` ports over a `w1 x w2` aperture in
// wavelengths.
typedef struct MfasGeometry {
  size_t n1;
  size_t n2;
  double w1;
  double w2;
} MfasGeometry;

// Link parameters. `snr_db` is the transmit SNR in dB.
typedef struct MfasScenario {
  struct MfasGeometry geom_tx;
  struct MfasGeometry geom_rx;
  size_t n_tx;
  size_t n_rx;
  double path_loss;
  double snr_db;
  enum MfasStrategy strategy;
} MfasScenario;

// A Monte Carlo estimate with its 95% half-width.
typedef struct MfasEstimate {
  double value;
  double ci95;
  uint64_t trials;
} MfasEstimate;

// One result row of a campaign.
typedef struct MfasRow {
  double sweep;
  double value;
  uint64_t trials;
  double ci95;
  uint64_t seed;
} MfasRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *mfas_version(void);

// Copies the calling thread's last error message into `buf`.
//
// Pass `buf = NULL, capacity = 0` to query the size (written to
// `needed`, including the NUL).
//
// # Safety
// `buf` must be valid for `capacity` bytes or null; `needed` must be
// writable or null.
enum MfasStatus mfas_last_error_message(char *buf, size_t capacity, size_t *needed);

// Builds a link. On success `*out` owns a handle released by
// [`mfas_link_free`].
//
// # Safety
// `scenario` must point to a valid scenario; `out` must be writable.
enum MfasStatus mfas_link_new(const struct MfasScenario *scenario, struct MfasLink **out);

// # Safety
// `link` must come from [`mfas_link_new`] and not be used afterwards.
void mfas_link_free(struct MfasLink *link);

// Mean achievable rate over `trials` seeded draws, bits/s/Hz.
//
// # Safety
// `link` must be a live handle; `out` must be writable.
enum MfasStatus mfas_link_mean_rate(const struct MfasLink *link,
                                    uint64_t trials,
                                    uint64_t seed,
                                    struct MfasEstimate *out);

// Probability that the rate falls below `rate_threshold`.
//
// # Safety
// `link` must be a live handle; `out` must be writable.
enum MfasStatus mfas_link_outage(const struct MfasLink *link,
                                 double rate_threshold,
                                 uint64_t trials,
                                 uint64_t seed,
                                 struct MfasEstimate *out);

// Effective rank of a surface's correlation matrix: eigenvalues at or
// above `threshold`. `truncation_error` may be null.
//
// # Safety
// `geometry` must be valid; `rank` writable; `truncation_error` writable
// or null.
enum MfasStatus mfas_estimate_rank(const struct MfasGeometry *geometry,
                                   double threshold,
                                   size_t *rank,
                                   double *truncation_error);

// Diversity gain at multiplexing gain `r`.
//
// # Safety
// `out` must be writable.
enum MfasStatus mfas_dmt(enum MfasDmtKind kind,
                         size_t a,
                         size_t b,
                         size_t n_min,
                         double aperture_rx,
                         double aperture_tx,
                         double r,
                         double *out);

// Waterfilling over `len` gains with total power `snr`. `powers` receives
// `len` values; `water_level` may be null.
//
// # Safety
// `gains` and `powers` must be valid for `len` elements.
enum MfasStatus mfas_waterfill(const double *gains,
                               size_t len,
                               double snr,
                               double *powers,
                               double *water_level);

// Parses a JSON campaign configuration.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum MfasStatus mfas_campaign_from_json(const char *json, struct MfasCampaign **out);

// # Safety
// `campaign` must come from [`mfas_campaign_from_json`] and not be used
// afterwards.
void mfas_campaign_free(struct MfasCampaign *campaign);

// Writes the configuration's diagnostics, one `field: message` per line
// (empty when valid), and their count.
//
// # Safety
// `campaign` must be live; `count` writable; `buf`/`needed` as in
// [`mfas_last_error_message`].
enum MfasStatus mfas_campaign_validate(const struct MfasCampaign *campaign,
                                       size_t *count,
                                       char *buf,
                                       size_t capacity,
                                       size_t *needed);

// Runs a campaign on `threads` workers (0 = all cores).
//
// # Safety
// `campaign` must be live; `out` must be writable.
enum MfasStatus mfas_campaign_run(const struct MfasCampaign *campaign,
                                  size_t threads,
                                  struct MfasResults **out);

// # Safety
// `results` must come from [`mfas_campaign_run`] and not be used
// afterwards.
void mfas_results_free(struct MfasResults *results);

// Number of result rows; 0 for a null handle.
//
// # Safety
// `results` must be live or null.
size_t mfas_results_len(const struct MfasResults *results);

// Numeric fields of row `index`, and its metric name through
// `metric`/`capacity`/`needed`.
//
// # Safety
// `results` must be live; `row` writable; string arguments as in
// [`mfas_last_error_message`].
enum MfasStatus mfas_results_row(const struct MfasResults *results,
                                 size_t index,
                                 struct MfasRow *row,
                                 char *metric,
                                 size_t capacity,
                                 size_t *needed);

// The results as CSV text (header `sweep,metric,value,trials,ci95,seed`,
// LF line endings).
//
// # Safety
// `results` must be live; string arguments as in
// [`mfas_last_error_message`].
enum MfasStatus mfas_results_csv(const struct MfasResults *results,
                                 char *buf,
                                 size_t capacity,
                                 size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIMO_FAS_H */
