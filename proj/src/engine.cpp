#include "ifbm/engine.hpp"

#include <cmath>
#include <sstream>
#include <thread>

#include "ifbm/error.hpp"
#include "ifbm/parallel.hpp"
#include "ifbm/rng.hpp"

namespace ifbm {

ProcessParams::ProcessParams(double mu, double sigma, double dt, DriftMode drift_mode)
    : mu_(mu),
      sigma_(sigma),
      dt_(dt),
      alpha_(mu + 0.5 * sigma * sigma),
      drift_mode_(drift_mode) {
  if (!std::isfinite(mu)) throw_domain("drift mu must be finite");
  if (!std::isfinite(sigma) || sigma < 0.0) throw_domain("volatility sigma must be >= 0");
  if (!std::isfinite(dt) || dt <= 0.0) throw_domain("time step dt must be > 0");
}

void SimConfig::validate() const {
  if (n_paths == 0) throw_domain("n_paths must be positive");
  if (n_steps == 0) throw_domain("n_steps must be positive");
  if (!std::isfinite(initial_price) || initial_price <= 0.0) {
    throw_domain("initial price must be positive");
  }
  if (n_paths > sample_cap / n_steps) {
    std::ostringstream msg;
    msg << "n_paths * n_steps exceeds the sample cap of " << sample_cap;
    throw Error(ErrorKind::Resource, msg.str());
  }
}

PathSet::PathSet(ProcessParams process, FeedbackParams feedback, SimConfig config,
                 std::vector<double> log_returns, std::vector<double> prices)
    : process_(process),
      feedback_(feedback),
      config_(config),
      log_returns_(std::move(log_returns)),
      prices_(std::move(prices)) {
  if (log_returns_.size() != config_.n_paths * config_.n_steps) {
    throw_domain("log-return matrix does not match n_paths x n_steps");
  }
  if (!prices_.empty() && prices_.size() != config_.n_paths * (config_.n_steps + 1)) {
    throw_domain("price matrix does not match n_paths x (n_steps + 1)");
  }
}

std::span<const double> PathSet::row(std::uint64_t path) const {
  return std::span<const double>(log_returns_).subspan(path * config_.n_steps,
                                                       config_.n_steps);
}

ReturnsSample::ReturnsSample(std::vector<double> values, SampleSource source)
    : values_(std::move(values)), source_(source) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      std::ostringstream msg;
      msg << "return sample value " << i << " is not finite";
      throw_domain(msg.str());
    }
  }
}

double step_log_return(double z, const ProcessParams& proc, const FeedbackParams& fb) {
  fb.validate();
  const double f = fb.k == 0.0 ? 0.0 : eval_f(z, fb.c);
  return step_log_return_with(z, f, proc, fb.k, std::sqrt(proc.dt()));
}

double gbm_step(double z, const ProcessParams& proc) {
  return proc.drift() * proc.dt() + proc.sigma() * z * std::sqrt(proc.dt());
}

unsigned resolve_threads(unsigned requested, std::uint64_t work_items) {
  unsigned n = requested;
  if (n == 0) {
    n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
  }
  if (work_items < n) n = static_cast<unsigned>(work_items == 0 ? 1 : work_items);
  return n;
}

std::vector<double> normal_matrix(const SimConfig& cfg) {
  cfg.validate();
  std::vector<double> z(cfg.n_paths * cfg.n_steps);
  detail::parallel_chunks(
      cfg.n_paths, resolve_threads(cfg.threads, cfg.n_paths),
      [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t p = begin; p < end; ++p) {
          NormalStream stream(cfg.master_seed, p);
          stream.fill(std::span<double>(z).subspan(p * cfg.n_steps, cfg.n_steps));
        }
      });
  return z;
}

namespace {

std::vector<double> materialize_prices(const std::vector<double>& returns,
                                       const SimConfig& cfg) {
  std::vector<double> prices(cfg.n_paths * (cfg.n_steps + 1));
  for (std::uint64_t p = 0; p < cfg.n_paths; ++p) {
    double* row = prices.data() + p * (cfg.n_steps + 1);
    const double* r = returns.data() + p * cfg.n_steps;
    row[0] = cfg.initial_price;
    for (std::uint64_t t = 0; t < cfg.n_steps; ++t) {
      row[t + 1] = row[t] * std::exp(r[t]);
      if (!std::isfinite(row[t + 1]) || row[t + 1] <= 0.0) {
        std::ostringstream msg;
        msg << "price level left the representable range at path " << p
            << ", step " << t + 1;
        throw_numerical(msg.str());
      }
    }
  }
  return prices;
}

template <typename StepFn>
std::vector<double> generate(const SimConfig& cfg, StepFn step) {
  std::vector<double> out(cfg.n_paths * cfg.n_steps);
  detail::parallel_chunks(
      cfg.n_paths, resolve_threads(cfg.threads, cfg.n_paths),
      [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t p = begin; p < end; ++p) {
          NormalStream stream(cfg.master_seed, p);
          double* row = out.data() + p * cfg.n_steps;
          for (std::uint64_t t = 0; t < cfg.n_steps; ++t) row[t] = step(stream());
        }
      });
  return out;
}

void check_finite(const std::vector<double>& returns) {
  for (double r : returns) {
    if (!std::isfinite(r)) throw_numerical("simulation produced a non-finite log return");
  }
}

}  // namespace

PathSet simulate(const ProcessParams& proc, const FeedbackParams& fb, const SimConfig& cfg) {
  fb.validate();
  cfg.validate();
  const double sqrt_dt = std::sqrt(proc.dt());
  auto returns = generate(cfg, [&](double z) {
    const double f = fb.k == 0.0 ? 0.0 : eval_f(z, fb.c);
    return step_log_return_with(z, f, proc, fb.k, sqrt_dt);
  });
  check_finite(returns);
  auto prices = cfg.materialize_prices ? materialize_prices(returns, cfg) : std::vector<double>{};
  return PathSet(proc, fb, cfg, std::move(returns), std::move(prices));
}

PathSet simulate_gbm(const ProcessParams& proc, const SimConfig& cfg) {
  cfg.validate();
  auto returns = generate(cfg, [&](double z) { return gbm_step(z, proc); });
  check_finite(returns);
  auto prices = cfg.materialize_prices ? materialize_prices(returns, cfg) : std::vector<double>{};
  PathSet out(proc, kGbmFeedback, cfg, std::move(returns), std::move(prices));
  out.has_feedback_ = false;
  return out;
}

ReturnsSample pool_returns(const PathSet& paths, std::size_t horizon) {
  if (horizon == 0) throw_domain("aggregation horizon must be >= 1");
  const auto all = paths.log_returns();
  if (horizon == 1) {
    return ReturnsSample(std::vector<double>(all.begin(), all.end()), SampleSource::Simulated);
  }
  const std::uint64_t blocks = paths.n_steps() / horizon;
  if (blocks == 0) throw_domain("aggregation horizon exceeds the number of steps");
  std::vector<double> pooled;
  pooled.reserve(paths.n_paths() * blocks);
  for (std::uint64_t p = 0; p < paths.n_paths(); ++p) {
    const auto row = paths.row(p);
    for (std::uint64_t b = 0; b < blocks; ++b) {
      double sum = 0.0;
      for (std::size_t j = 0; j < horizon; ++j) sum += row[b * horizon + j];
      pooled.push_back(sum);
    }
  }
  return ReturnsSample(std::move(pooled), SampleSource::Simulated);
}

}  // namespace ifbm
