#ifndef PPSURV_H
#define PPSURV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PpsStatus {
  PPS_STATUS_OK = 0,
  PPS_STATUS_NULL_POINTER = 1,
  // Malformed data, configuration or arguments.
  PPS_STATUS_INVALID_INPUT = 2,
  // A computation failed (sampler, fitting, aborted design run).
  PPS_STATUS_RUNTIME = 3,
  // A panic was caught at the boundary.
  PPS_STATUS_PANIC = 4,
  // The output buffer is shorter than required.
  PPS_STATUS_BUFFER_TOO_SMALL = 5,
} PpsStatus;

typedef enum PpsRole {
  PPS_ROLE_CURRENT = 0,
  PPS_ROLE_HISTORICAL = 1,
} PpsRole;

typedef struct PpsDataset PpsDataset;

typedef struct PpsMixture PpsMixture;

typedef struct PpsPartition PpsPartition;

typedef struct PpsPosterior PpsPosterior;

typedef struct PpsStrata PpsStrata;

// MCMC settings; obtain defaults from [`pps_sampler_default`].
typedef struct PpsSampler {
  size_t n_mc;
  size_t n_burnin;
  double beta_width;
  double log_hazard_width;
  uint32_t max_steps;
  uint64_t seed;
} PpsSampler;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until
// the next call into the library from the same thread.
const char *pps_last_error(void);

// # Safety
// `s` must come from this library or be null.
void pps_string_free(char *s);

struct PpsSampler pps_sampler_default(void);

// Label-to-index map shared by datasets loaded from files, so that equal
// stratum labels map to the same index across datasets.
struct PpsStrata *pps_strata_new(void);

// # Safety
// `strata` must come from [`pps_strata_new`] or be null.
void pps_strata_free(struct PpsStrata *strata);

// Dataset from arrays: `covariates` is row-major `n x p` with the
// treatment indicator first; `strata` holds 0-based indices or is null for
// a single stratum.
//
// # Safety
// Arrays must hold the stated number of elements.
enum PpsStatus pps_dataset_new(const double *times,
                               const uint8_t *events,
                               const double *covariates,
                               size_t n,
                               size_t p,
                               const uint32_t *strata,
                               enum PpsRole role,
                               struct PpsDataset **out);

// Loads a delimited file. `stratum`, `filter_column` and `filter_value`
// may be null.
//
// # Safety
// Strings must be NUL-terminated; `covariates` must hold `n_covariates`
// strings; `strata` must be a live handle.
enum PpsStatus pps_dataset_load(const char *path,
                                const char *time,
                                const char *event,
                                const char *stratum,
                                const char *const *covariates,
                                size_t n_covariates,
                                const char *filter_column,
                                const char *filter_value,
                                enum PpsRole role,
                                struct PpsStrata *strata,
                                struct PpsDataset **out);

// # Safety
// `d` must be a live handle.
size_t pps_dataset_len(const struct PpsDataset *d);

// # Safety
// `d` must be a live handle.
size_t pps_dataset_n_events(const struct PpsDataset *d);

// # Safety
// `d` must come from this library or be null.
void pps_dataset_free(struct PpsDataset *d);

// Partition from explicit interior change points: stratum `s` owns
// `counts[s]` consecutive entries of `cuts`.
//
// # Safety
// `counts` holds `n_strata` entries and `cuts` their sum.
enum PpsStatus pps_partition_from_cuts(const double *cuts,
                                       const size_t *counts,
                                       size_t n_strata,
                                       struct PpsPartition **out);

// Equal-events partition from the pooled event times of `datasets`, with
// `intervals[s]` intervals in stratum `s`.
//
// # Safety
// Arrays must hold the stated number of elements of live handles.
enum PpsStatus pps_partition_default(const struct PpsDataset *const *datasets,
                                     size_t n_datasets,
                                     const size_t *intervals,
                                     size_t n_strata,
                                     struct PpsPartition **out);

// Interior change points of stratum `s` copied into `out`; `n_out`
// receives the count.
//
// # Safety
// `out` must hold `len` values.
enum PpsStatus pps_partition_cuts(const struct PpsPartition *part,
                                  size_t stratum,
                                  double *out,
                                  size_t len,
                                  size_t *n_out);

// # Safety
// `part` must come from this library or be null.
void pps_partition_free(struct PpsPartition *part);

// Power-prior posterior with fixed `a0` (one entry per historical
// dataset). `current` may be null; `prior_json` null selects the default
// priors.
//
// # Safety
// Handles must be live; arrays must hold the stated number of elements.
enum PpsStatus pps_fit_fixed(const struct PpsDataset *current,
                             const struct PpsDataset *const *historical,
                             size_t n_historical,
                             const double *a0,
                             const struct PpsPartition *part,
                             const char *prior_json,
                             struct PpsSampler sampler,
                             struct PpsPosterior **out);

// Normalized-power-prior posterior with random `a0`, using `mixture` as
// the prior on `beta`.
//
// # Safety
// Handles must be live.
enum PpsStatus pps_fit_random(const struct PpsDataset *current,
                              const struct PpsMixture *mixture,
                              const struct PpsPartition *part,
                              const char *prior_json,
                              struct PpsSampler sampler,
                              struct PpsPosterior **out);

// # Safety
// `post` must be a live handle.
size_t pps_posterior_n_draws(const struct PpsPosterior *post);

// # Safety
// `post` must be a live handle.
size_t pps_posterior_n_beta(const struct PpsPosterior *post);

// # Safety
// `post` must be a live handle.
size_t pps_posterior_n_strata(const struct PpsPosterior *post);

// Number of hazard intervals of stratum `s`, or 0 when out of range.
//
// # Safety
// `post` must be a live handle.
size_t pps_posterior_n_intervals(const struct PpsPosterior *post, size_t stratum);

// `beta` draws, row-major `n_draws x P`.
//
// # Safety
// `out` must hold `len` values.
enum PpsStatus pps_posterior_beta(const struct PpsPosterior *post, double *out, size_t len);

// Baseline hazard draws of stratum `s`, row-major `n_draws x K_s`.
//
// # Safety
// `out` must hold `len` values.
enum PpsStatus pps_posterior_lambda(const struct PpsPosterior *post,
                                    size_t stratum,
                                    double *out,
                                    size_t len);

// Per-parameter mean, SD and equal-tailed interval as JSON.
//
// # Safety
// `post` must be a live handle; free the result with [`pps_string_free`].
enum PpsStatus pps_posterior_summary_json(const struct PpsPosterior *post,
                                          double level,
                                          char **out);

// # Safety
// `post` must come from this library or be null.
void pps_posterior_free(struct PpsPosterior *post);

// Approximates the prior on `beta` induced by Beta(`shape1[j]`,
// `shape2[j]`) discounting of each historical dataset with `n_draws`
// outer draws, and fits one multivariate normal to it.
//
// # Safety
// Arrays must hold `n_historical` elements; handles must be live.
enum PpsStatus pps_approximate_prior(const struct PpsDataset *const *historical,
                                     size_t n_historical,
                                     const struct PpsPartition *part,
                                     const char *prior_json,
                                     const double *shape1,
                                     const double *shape2,
                                     size_t n_draws,
                                     struct PpsSampler sampler,
                                     struct PpsMixture **out);

// Mixture from its JSON form: `{"components": [{"mean", "covariance",
// "weight"}, ...]}`.
//
// # Safety
// `json` must be NUL-terminated.
enum PpsStatus pps_mixture_from_json(const char *json, struct PpsMixture **out);

// # Safety
// `m` must be a live handle; free the result with [`pps_string_free`].
enum PpsStatus pps_mixture_to_json(const struct PpsMixture *m, char **out);

// # Safety
// `m` must come from this library or be null.
void pps_mixture_free(struct PpsMixture *m);

// Runs a design study described by a TOML configuration in the format
// read by the `ppsurv` command line (fixed `a0` when `random` is 0) and
// returns its JSON result. Files are also written under the configured
// output directory.
//
// # Safety
// `config_toml` must be NUL-terminated; free the result with
// [`pps_string_free`].
enum PpsStatus pps_design_from_toml(const char *config_toml, int32_t random, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PPSURV_H */
