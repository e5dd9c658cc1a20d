/*
 * ifbm.h - C interface to the IFBM simulation and calibration toolkit.
 *
 * Conventions:
 *   - Every fallible call returns an ifbm_status; IFBM_OK is zero. On failure
 *     ifbm_last_error() returns a thread-local message describing the error.
 *   - Objects are opaque handles created by *_create / producer calls and
 *     released with the matching *_destroy. Destroy functions accept NULL.
 *   - Strings returned through char** are heap-allocated NUL-terminated
 *     buffers owned by the caller and freed with ifbm_string_free.
 *   - All functions are safe to call concurrently on distinct handles; const
 *     handles may be shared between threads.
 */
#ifndef IFBM_IFBM_H
#define IFBM_IFBM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(IFBM_BUILDING_LIBRARY)
#    define IFBM_API __declspec(dllexport)
#  else
#    define IFBM_API __declspec(dllimport)
#  endif
#else
#  define IFBM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ifbm_status {
  IFBM_OK = 0,
  IFBM_ERROR_DOMAIN = 1,
  IFBM_ERROR_NUMERICAL = 2,
  IFBM_ERROR_RESOURCE = 3,
  IFBM_ERROR_UNSUPPORTED = 4,
  IFBM_ERROR_IO = 5,
  IFBM_ERROR_DEGENERATE_BINNING = 6,
  IFBM_ERROR_FIT_FAILURE = 7,
  IFBM_ERROR_INVALID_ARGUMENT = 8, /* NULL handle/pointer, bad enum value */
  IFBM_ERROR_INTERNAL = 99
} ifbm_status;

typedef enum ifbm_format { IFBM_FORMAT_CSV = 0, IFBM_FORMAT_JSON = 1 } ifbm_format;

typedef enum ifbm_region {
  IFBM_REGION_BOUNDARY = 0,
  IFBM_REGION_1 = 1,
  IFBM_REGION_2 = 2,
  IFBM_REGION_3 = 3,
  IFBM_REGION_4 = 4,
  IFBM_REGION_5 = 5,
  IFBM_REGION_6 = 6
} ifbm_region;

typedef enum ifbm_sign {
  IFBM_SIGN_NEGATIVE = -1,
  IFBM_SIGN_ZERO = 0,
  IFBM_SIGN_POSITIVE = 1
} ifbm_sign;

typedef enum ifbm_drift_mode {
  IFBM_DRIFT_MU_SCALED = 0,
  IFBM_DRIFT_ALPHA_SCALED = 1
} ifbm_drift_mode;

typedef enum ifbm_source { IFBM_SOURCE_SIMULATED = 0, IFBM_SOURCE_EMPIRICAL = 1 } ifbm_source;

IFBM_API const char* ifbm_version(void);
IFBM_API const char* ifbm_last_error(void);
IFBM_API const char* ifbm_status_name(ifbm_status status);
IFBM_API void ifbm_string_free(char* text);

/* ---- feedback function ------------------------------------------------ */

IFBM_API ifbm_status ifbm_eval_f(double z, double c, double* out);
IFBM_API ifbm_status ifbm_eval_feedback(double z, double k, double c, double* out);
IFBM_API ifbm_status ifbm_eval_f_derivative(double z, double c, double* out);
IFBM_API ifbm_status ifbm_find_root(double c, double* out);
IFBM_API ifbm_status ifbm_find_stationary(double c, double* out);
IFBM_API ifbm_status ifbm_classify_region(double z, double k, double c, ifbm_region* out);
IFBM_API ifbm_status ifbm_feedback_sign(double z, double k, double c, ifbm_sign* out);

/* Critical points, regions and feedback-sign partition as JSON. */
IFBM_API ifbm_status ifbm_critical_points_json(double k, double c, const char* metadata_json,
                                               char** out);

typedef struct ifbm_curve ifbm_curve;

IFBM_API ifbm_status ifbm_curve_create(double k, double c, double z_min, double z_max,
                                       size_t n_points, ifbm_curve** out);
IFBM_API void ifbm_curve_destroy(ifbm_curve* curve);
IFBM_API size_t ifbm_curve_size(const ifbm_curve* curve);
IFBM_API ifbm_status ifbm_curve_point(const ifbm_curve* curve, size_t index, double* z,
                                      double* value);
/* metadata_json (may be NULL) is embedded in JSON output and ignored for CSV. */
IFBM_API ifbm_status ifbm_curve_serialize(const ifbm_curve* curve, ifbm_format format,
                                          const char* metadata_json, char** out);

typedef struct ifbm_surface ifbm_surface;

IFBM_API ifbm_status ifbm_surface_create(double k, double c, double z_min, double z_max,
                                         size_t n_points, size_t t_steps, ifbm_surface** out);
IFBM_API void ifbm_surface_destroy(ifbm_surface* surface);
IFBM_API size_t ifbm_surface_time_steps(const ifbm_surface* surface);
IFBM_API size_t ifbm_surface_grid_size(const ifbm_surface* surface);
IFBM_API ifbm_status ifbm_surface_value(const ifbm_surface* surface, size_t t, size_t index,
                                        double* value);
IFBM_API ifbm_status ifbm_surface_serialize(const ifbm_surface* surface, ifbm_format format,
                                            const char* metadata_json, char** out);

/* ---- stochastic engine ------------------------------------------------ */

typedef struct ifbm_process {
  double mu;
  double sigma;
  double dt;
  ifbm_drift_mode drift_mode;
} ifbm_process;

typedef struct ifbm_sim_config {
  uint64_t n_paths;
  uint64_t n_steps;
  uint64_t master_seed;
  double initial_price;
  uint32_t threads; /* 0 = hardware concurrency; never changes results */
  uint64_t sample_cap;
  int materialize_prices;
} ifbm_sim_config;

/* Fills defaults: 1 path, 1 step, seed 0, price 100, auto threads. */
IFBM_API void ifbm_sim_config_init(ifbm_sim_config* cfg);

IFBM_API ifbm_status ifbm_step_log_return(double z, const ifbm_process* proc, double k, double c,
                                          double* out);
/* Deviates [offset, offset + n) of the stream for (seed, path_index). */
IFBM_API ifbm_status ifbm_normal_stream(uint64_t master_seed, uint64_t path_index,
                                        uint64_t offset, double* out, size_t n);

typedef struct ifbm_pathset ifbm_pathset;

IFBM_API ifbm_status ifbm_simulate(const ifbm_process* proc, double k, double c,
                                   const ifbm_sim_config* cfg, ifbm_pathset** out);
IFBM_API ifbm_status ifbm_simulate_gbm(const ifbm_process* proc, const ifbm_sim_config* cfg,
                                       ifbm_pathset** out);
IFBM_API void ifbm_pathset_destroy(ifbm_pathset* paths);
IFBM_API uint64_t ifbm_pathset_paths(const ifbm_pathset* paths);
IFBM_API uint64_t ifbm_pathset_steps(const ifbm_pathset* paths);
/* Row-major n_paths x n_steps; valid until the handle is destroyed. */
IFBM_API const double* ifbm_pathset_log_returns(const ifbm_pathset* paths);
/* Row-major n_paths x (n_steps + 1), or NULL when prices were not materialized. */
IFBM_API const double* ifbm_pathset_prices(const ifbm_pathset* paths);
IFBM_API ifbm_status ifbm_pathset_serialize(const ifbm_pathset* paths, ifbm_format format,
                                            const char* metadata_json, char** out);
IFBM_API ifbm_status ifbm_pathset_provenance_json(const ifbm_pathset* paths, char** out);
/* "t,price" CSV for one path (requires materialized prices). */
IFBM_API ifbm_status ifbm_pathset_price_csv(const ifbm_pathset* paths, uint64_t path, char** out);

typedef struct ifbm_sample ifbm_sample;

IFBM_API ifbm_status ifbm_sample_create(const double* values, size_t n, ifbm_source source,
                                        ifbm_sample** out);
IFBM_API ifbm_status ifbm_pool_returns(const ifbm_pathset* paths, size_t horizon,
                                       ifbm_sample** out);
/* One value per line; '#' comments and a leading header line are skipped. */
IFBM_API ifbm_status ifbm_sample_load(const char* path, ifbm_sample** out);
IFBM_API void ifbm_sample_destroy(ifbm_sample* sample);
IFBM_API size_t ifbm_sample_size(const ifbm_sample* sample);
IFBM_API const double* ifbm_sample_values(const ifbm_sample* sample);
IFBM_API ifbm_status ifbm_sample_serialize(const ifbm_sample* sample, ifbm_format format,
                                           const char* metadata_json, char** out);

/* ---- market data ------------------------------------------------------ */

typedef struct ifbm_price_series ifbm_price_series;

/* price_column / time_column: header name, or a decimal zero-based index.
 * time_column may be NULL. */
IFBM_API ifbm_status ifbm_price_series_load_csv(const char* path, const char* price_column,
                                                const char* time_column,
                                                ifbm_price_series** out);
IFBM_API void ifbm_price_series_destroy(ifbm_price_series* series);
IFBM_API size_t ifbm_price_series_size(const ifbm_price_series* series);
IFBM_API const double* ifbm_price_series_prices(const ifbm_price_series* series);
IFBM_API ifbm_status ifbm_log_returns(const ifbm_price_series* series, ifbm_sample** out);

/* ---- analytics -------------------------------------------------------- */

typedef struct ifbm_moments {
  double mean;
  double variance;
  double skewness;        /* NaN when shape_defined == 0 */
  double excess_kurtosis; /* NaN when shape_defined == 0 */
  uint64_t n;             /* 0 for exact (quadrature) moments */
  int exact;
  int shape_defined;
} ifbm_moments;

IFBM_API ifbm_status ifbm_sample_moments(const ifbm_sample* sample, ifbm_moments* out);
IFBM_API ifbm_status ifbm_exact_step_moments(const ifbm_process* proc, double k, double c,
                                             ifbm_moments* out);
IFBM_API ifbm_status ifbm_moments_json(const ifbm_moments* moments, const char* metadata_json,
                                       char** out);
IFBM_API ifbm_status ifbm_central_mass(const ifbm_process* proc, double k, double c,
                                       double half_width, double* out);
IFBM_API ifbm_status ifbm_tail_mass(const ifbm_process* proc, double k, double c,
                                    double threshold, double* out);

typedef struct ifbm_histogram ifbm_histogram;

IFBM_API ifbm_status ifbm_histogram_build_fd(const ifbm_sample* sample, ifbm_histogram** out);
IFBM_API ifbm_status ifbm_histogram_build_uniform(const ifbm_sample* sample, double lo, double hi,
                                                  size_t bins, ifbm_histogram** out);
IFBM_API ifbm_status ifbm_histogram_build_edges(const ifbm_sample* sample, const double* edges,
                                                size_t n_edges, ifbm_histogram** out);
IFBM_API void ifbm_histogram_destroy(ifbm_histogram* hist);
IFBM_API size_t ifbm_histogram_bins(const ifbm_histogram* hist);
IFBM_API const double* ifbm_histogram_edges(const ifbm_histogram* hist);
IFBM_API const uint64_t* ifbm_histogram_counts(const ifbm_histogram* hist);
IFBM_API ifbm_status ifbm_histogram_tallies(const ifbm_histogram* hist, uint64_t* total,
                                            uint64_t* underflow, uint64_t* overflow);
IFBM_API ifbm_status ifbm_histogram_serialize(const ifbm_histogram* hist, ifbm_format format,
                                              const char* metadata_json, char** out);

typedef struct ifbm_chi_square {
  double statistic;
  uint64_t dof;
  uint64_t effective_bins;
  uint64_t merged_bins;
  double p_value;
} ifbm_chi_square;

IFBM_API ifbm_status ifbm_chi_square_histograms(const ifbm_histogram* observed,
                                                const ifbm_histogram* expected,
                                                uint32_t fitted_params, ifbm_chi_square* out);
IFBM_API ifbm_status ifbm_chi_square_probabilities(const ifbm_histogram* observed,
                                                   const double* probabilities, size_t n,
                                                   uint32_t fitted_params, ifbm_chi_square* out);
IFBM_API ifbm_status ifbm_chi_square_survival(double statistic, double dof, double* out);

/* ---- calibration ------------------------------------------------------ */

typedef struct ifbm_fit_config {
  double k_min, k_max, k_step;
  double c_min, c_max, c_step;
  uint64_t mc_paths;
  uint64_t mc_steps;
  uint64_t seed;
  int refine;
  uint32_t threads;
  uint64_t sample_cap;
  ifbm_drift_mode drift_mode;
} ifbm_fit_config;

/* K in [-12, 2] step 0.5, c in [0.25, 4] step 0.25, 100 x 1000 simulated
 * returns per candidate, refinement on. */
IFBM_API void ifbm_fit_config_init(ifbm_fit_config* cfg);

IFBM_API ifbm_status ifbm_estimate_mu_sigma(const ifbm_sample* returns, double dt, double* mu,
                                            double* sigma);
IFBM_API ifbm_status ifbm_objective(double k, double c, const ifbm_histogram* empirical,
                                    const ifbm_process* proc, const ifbm_fit_config* cfg,
                                    ifbm_chi_square* out);

typedef struct ifbm_fit_result ifbm_fit_result;

/* On IFBM_ERROR_FIT_FAILURE *out still receives a result carrying the
 * diagnostic surface (ifbm_fit_result_has_optimum returns 0). */
IFBM_API ifbm_status ifbm_fit(const ifbm_sample* empirical, double dt, const ifbm_fit_config* cfg,
                              ifbm_fit_result** out);
IFBM_API void ifbm_fit_result_destroy(ifbm_fit_result* result);
IFBM_API int ifbm_fit_result_has_optimum(const ifbm_fit_result* result);
IFBM_API ifbm_status ifbm_fit_result_params(const ifbm_fit_result* result, double* k_hat,
                                            double* c_hat, double* mu_hat, double* sigma_hat);
IFBM_API ifbm_status ifbm_fit_result_chi_square(const ifbm_fit_result* result, ifbm_chi_square* best,
                                                ifbm_chi_square* gbm);
IFBM_API size_t ifbm_fit_result_surface_size(const ifbm_fit_result* result);
/* chi2 is NaN for degenerate candidates. */
IFBM_API ifbm_status ifbm_fit_result_surface_point(const ifbm_fit_result* result, size_t index,
                                                   double* k, double* c, double* chi2);
IFBM_API ifbm_status ifbm_fit_result_json(const ifbm_fit_result* result, const char* metadata_json,
                                          char** out);
IFBM_API ifbm_status ifbm_fit_result_surface_csv(const ifbm_fit_result* result, char** out);

/* ---- reports ---------------------------------------------------------- */

/* Roots, stationary points, regions (or a notice for K >= 0), feedback-sign
 * partition and exact single-step moments. */
IFBM_API ifbm_status ifbm_analyze_json(double k, double c, const ifbm_process* proc,
                                       const char* metadata_json, char** out);

#ifdef __cplusplus
}
#endif

#endif /* IFBM_IFBM_H */
