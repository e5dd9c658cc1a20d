#pragma once

// GBM / IFBM log-return generation.
//
//   MuScaled:    r = mu dt    + sigma z sqrt(dt) + mu K f_c(z) dt
//   AlphaScaled: r = alpha dt + sigma z sqrt(dt) + alpha K f_c(z) dt,
//                alpha = mu + sigma^2 / 2
//
// A single standard normal z drives both the diffusion and the feedback term
// of each step.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ifbm/feedback.hpp"

namespace ifbm {

enum class DriftMode { MuScaled, AlphaScaled };

class ProcessParams {
 public:
  /// Throws Error(Domain) for non-finite mu, sigma < 0 or dt <= 0.
  ProcessParams(double mu, double sigma, double dt,
                DriftMode drift_mode = DriftMode::MuScaled);

  double mu() const { return mu_; }
  double sigma() const { return sigma_; }
  double dt() const { return dt_; }
  double alpha() const { return alpha_; }
  DriftMode drift_mode() const { return drift_mode_; }

  /// mu or alpha depending on the drift mode.
  double drift() const { return drift_mode_ == DriftMode::MuScaled ? mu_ : alpha_; }

 private:
  double mu_;
  double sigma_;
  double dt_;
  double alpha_;
  DriftMode drift_mode_;
};

inline constexpr std::uint64_t kDefaultSampleCap = 200'000'000;

struct SimConfig {
  std::uint64_t n_paths = 1;
  std::uint64_t n_steps = 1;
  std::uint64_t master_seed = 0;
  double initial_price = 100.0;
  /// Worker threads; 0 picks the hardware concurrency. Never affects output.
  unsigned threads = 0;
  std::uint64_t sample_cap = kDefaultSampleCap;
  bool materialize_prices = false;

  void validate() const;
};

/// Feedback term weight used when the engine runs pure GBM.
inline constexpr FeedbackParams kGbmFeedback{0.0, 1.0};

class PathSet {
 public:
  PathSet(ProcessParams process, FeedbackParams feedback, SimConfig config,
          std::vector<double> log_returns, std::vector<double> prices);

  std::uint64_t n_paths() const { return config_.n_paths; }
  std::uint64_t n_steps() const { return config_.n_steps; }

  std::span<const double> log_returns() const { return log_returns_; }
  std::span<const double> row(std::uint64_t path) const;
  double at(std::uint64_t path, std::uint64_t step) const {
    return log_returns_[path * config_.n_steps + step];
  }

  bool has_prices() const { return !prices_.empty(); }
  /// n_paths x (n_steps + 1); column 0 is the initial price.
  std::span<const double> prices() const { return prices_; }
  double price(std::uint64_t path, std::uint64_t t) const {
    return prices_[path * (config_.n_steps + 1) + t];
  }

  const ProcessParams& process() const { return process_; }
  const FeedbackParams& feedback() const { return feedback_; }
  const SimConfig& config() const { return config_; }
  /// False for runs produced by simulate_gbm.
  bool has_feedback_term() const { return has_feedback_; }

 private:
  friend PathSet simulate_gbm(const ProcessParams&, const SimConfig&);

  ProcessParams process_;
  FeedbackParams feedback_;
  SimConfig config_;
  std::vector<double> log_returns_;
  std::vector<double> prices_;
  bool has_feedback_ = true;
};

enum class SampleSource { Simulated, Empirical };

class ReturnsSample {
 public:
  /// Throws Error(Domain) if any value is non-finite.
  explicit ReturnsSample(std::vector<double> values,
                         SampleSource source = SampleSource::Empirical);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  SampleSource source() const { return source_; }

 private:
  std::vector<double> values_;
  SampleSource source_;
};

double step_log_return(double z, const ProcessParams& proc, const FeedbackParams& fb);

/// Same as step_log_return with f_c(z) supplied by the caller; used by the
/// calibration loop to reuse f_c over a fixed set of deviates. Bit-identical
/// to step_log_return when f_c_of_z == eval_f(z, fb.c).
inline double step_log_return_with(double z, double f_c_of_z, const ProcessParams& proc,
                                   double k, double sqrt_dt) {
  const double drift = proc.drift();
  const double base = drift * proc.dt() + proc.sigma() * z * sqrt_dt;
  if (k == 0.0) return base;
  return base + drift * k * f_c_of_z * proc.dt();
}

/// Pure GBM step: drift dt + sigma z sqrt(dt).
double gbm_step(double z, const ProcessParams& proc);

/// Row-major n_paths x n_steps standard normal deviates for cfg's seed.
std::vector<double> normal_matrix(const SimConfig& cfg);

PathSet simulate(const ProcessParams& proc, const FeedbackParams& fb, const SimConfig& cfg);

/// Independent GBM code path (no feedback evaluation at all).
PathSet simulate_gbm(const ProcessParams& proc, const SimConfig& cfg);

/// Pools per-step returns in row-major order. With horizon h > 1 each path
/// contributes floor(n_steps / h) non-overlapping sums of h consecutive steps.
ReturnsSample pool_returns(const PathSet& paths, std::size_t horizon = 1);

/// Resolves a requested worker count (0 = hardware concurrency) and clamps
/// it to the amount of work available.
unsigned resolve_threads(unsigned requested, std::uint64_t work_items);

}  // namespace ifbm
