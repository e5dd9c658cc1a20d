#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ifbm/analytics.hpp"
#include "ifbm/engine.hpp"
#include "ifbm/error.hpp"

namespace ifbm {

/// Inclusive arithmetic grid min, min + step, ... up to max.
struct GridRange {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;

  std::vector<double> values() const;
};

struct FitConfig {
  GridRange k_grid{-12.0, 2.0, 0.5};
  GridRange c_grid{0.25, 4.0, 0.25};
  std::uint64_t mc_paths = 100;
  std::uint64_t mc_steps = 1000;
  bool refine = true;
  /// Parameter change below which golden-section refinement stops.
  double refine_tolerance = 1e-3;
  /// Shared by every candidate (common random numbers).
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::uint64_t sample_cap = kDefaultSampleCap;
  DriftMode drift_mode = DriftMode::MuScaled;

  void validate() const;
};

struct DriftVolatility {
  double mu = 0.0;
  double sigma = 0.0;
};

/// mu = mean / dt, sigma = unbiased std / sqrt(dt). Requires n >= 2.
DriftVolatility estimate_mu_sigma(const ReturnsSample& returns, double dt);

struct SurfacePoint {
  double k = 0.0;
  double c = 0.0;
  /// Empty when the candidate's binning was degenerate.
  std::optional<ChiSquareResult> chi2;
};

struct FitResult {
  double k_hat = 0.0;
  double c_hat = 1.0;
  ChiSquareResult chi2;
  /// Objective at K = 0 (pure GBM with the estimated mu, sigma).
  ChiSquareResult gbm_chi2;
  /// Best candidate on the grid itself, before refinement.
  ChiSquareResult grid_chi2;
  bool refined = false;
  double mu_hat = 0.0;
  double sigma_hat = 0.0;
  double dt = 1.0;
  std::uint64_t n_empirical = 0;
  /// Row per grid candidate, c-major then K ascending.
  std::vector<SurfacePoint> surface;
  Histogram empirical;
  FitConfig config;

  /// gbm_chi2 - chi2: improvement of the best IFBM candidate over GBM.
  double improvement_over_gbm() const { return gbm_chi2.statistic - chi2.statistic; }
  /// gbm_chi2 - grid_chi2. Refinement searches a continuum and can always pick
  /// up Monte Carlo noise, so significance is judged on the grid optimum.
  double grid_improvement_over_gbm() const { return gbm_chi2.statistic - grid_chi2.statistic; }
  /// 95% point of chi^2(2), widened by (1 + n_empirical / n_simulated) because
  /// the expected counts are themselves a Monte Carlo sample.
  double flat_threshold() const;
  /// True when the grid improvement is below flat_threshold(), i.e. the data give
  /// no evidence for a non-zero feedback term.
  bool flat_near_gbm() const;
};

/// Thrown by fit() when no candidate produced a usable chi-square; carries
/// the diagnostic surface.
class FitFailure : public Error {
 public:
  FitFailure(const std::string& what, std::vector<SurfacePoint> surface)
      : Error(ErrorKind::FitFailure, what), surface_(std::move(surface)) {}
  const std::vector<SurfacePoint>& surface() const { return surface_; }

 private:
  std::vector<SurfacePoint> surface_;
};

/// Simulates IFBM at (k, c) with cfg.seed, bins the pooled returns on the
/// empirical edges and returns chi-square with two fitted parameters.
ChiSquareResult objective(double k, double c, const Histogram& empirical,
                          const ProcessParams& proc, const FitConfig& cfg);

/// Two-stage calibration: (mu, sigma) from the sample, then grid search over
/// (K, c) with optional coordinate-wise golden-section refinement.
FitResult fit(const ReturnsSample& empirical, double dt, const FitConfig& cfg);

/// Index of the smallest statistic; ties go to smaller |K|, then smaller c,
/// then smaller K. Empty when no point has a statistic.
std::optional<std::size_t> select_optimum(std::span<const SurfacePoint> surface);

}  // namespace ifbm
