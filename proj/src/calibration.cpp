#include "ifbm/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ifbm/parallel.hpp"

namespace ifbm {

namespace {

constexpr unsigned kFittedParams = 2;
// 95% point of chi^2 with 2 degrees of freedom: -2 ln 0.05.
const double kChi2Dof2Q95 = -2.0 * std::log(0.05);

void require_grid(const GridRange& g, const char* name) {
  if (!std::isfinite(g.min) || !std::isfinite(g.max) || !std::isfinite(g.step) ||
      !(g.step > 0.0) || g.max < g.min) {
    std::ostringstream msg;
    msg << name << " grid needs finite min <= max and step > 0";
    throw_domain(msg.str());
  }
}

// Evaluates candidates against one fixed matrix of deviates.
class CrnEvaluator {
 public:
  CrnEvaluator(const Histogram& empirical, const ProcessParams& proc, const FitConfig& cfg)
      : empirical_(empirical), proc_(proc), sqrt_dt_(std::sqrt(proc.dt())) {
    SimConfig sim;
    sim.n_paths = cfg.mc_paths;
    sim.n_steps = cfg.mc_steps;
    sim.master_seed = cfg.seed;
    sim.threads = cfg.threads;
    sim.sample_cap = cfg.sample_cap;
    z_ = normal_matrix(sim);
  }

  std::vector<double> f_values(double c) const {
    std::vector<double> f(z_.size());
    for (std::size_t i = 0; i < z_.size(); ++i) f[i] = eval_f(z_[i], c);
    return f;
  }

  ChiSquareResult evaluate(double k, std::span<const double> f, std::vector<double>& scratch) const {
    scratch.resize(z_.size());
    for (std::size_t i = 0; i < z_.size(); ++i) {
      scratch[i] = step_log_return_with(z_[i], f[i], proc_, k, sqrt_dt_);
      if (!std::isfinite(scratch[i])) throw_numerical("simulated return is not finite");
    }
    const Histogram simulated = bin_on_edges(scratch, empirical_.edges);
    return chi_square(empirical_, simulated, kFittedParams);
  }

  std::optional<ChiSquareResult> try_evaluate(double k, double c) const {
    const auto f = f_values(c);
    std::vector<double> scratch;
    try {
      return evaluate(k, f, scratch);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::DegenerateBinning) return std::nullopt;
      throw;
    }
  }

 private:
  const Histogram& empirical_;
  ProcessParams proc_;
  double sqrt_dt_;
  std::vector<double> z_;
};

double statistic_or_inf(const std::optional<ChiSquareResult>& r) {
  return r ? r->statistic : std::numeric_limits<double>::infinity();
}

// Golden-section minimisation of g over [lo, hi].
template <typename G>
double golden_section(G&& g, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double g1 = g(x1), g2 = g(x2);
  while (b - a > tol) {
    if (g1 <= g2) {
      b = x2;
      x2 = x1;
      g2 = g1;
      x1 = b - inv_phi * (b - a);
      g1 = g(x1);
    } else {
      a = x1;
      x1 = x2;
      g1 = g2;
      x2 = a + inv_phi * (b - a);
      g2 = g(x2);
    }
  }
  return g1 <= g2 ? x1 : x2;
}

}  // namespace

std::vector<double> GridRange::values() const {
  require_grid(*this, "parameter");
  std::vector<double> out;
  const double slack = 1e-9 * step;
  for (std::size_t i = 0;; ++i) {
    const double v = min + step * static_cast<double>(i);
    if (v > max + slack) break;
    out.push_back(v);
  }
  return out;
}

void FitConfig::validate() const {
  require_grid(k_grid, "K");
  require_grid(c_grid, "c");
  if (!(c_grid.min > 0.0)) throw_domain("c grid must be entirely positive (c > 0)");
  if (mc_paths == 0 || mc_steps == 0) throw_domain("simulation budget must be positive");
  if (mc_paths > sample_cap / mc_steps) {
    throw Error(ErrorKind::Resource, "simulation budget exceeds the sample cap");
  }
  if (!(refine_tolerance > 0.0)) throw_domain("refinement tolerance must be positive");
}

double FitResult::flat_threshold() const {
  const double simulated = static_cast<double>(config.mc_paths) * static_cast<double>(config.mc_steps);
  return kChi2Dof2Q95 * (1.0 + static_cast<double>(n_empirical) / simulated);
}

bool FitResult::flat_near_gbm() const { return grid_improvement_over_gbm() < flat_threshold(); }

DriftVolatility estimate_mu_sigma(const ReturnsSample& returns, double dt) {
  if (!std::isfinite(dt) || dt <= 0.0) throw_domain("time step dt must be > 0");
  const auto v = returns.values();
  if (v.size() < 2) throw_domain("estimating mu and sigma needs at least 2 returns");
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double residual = 0.0;
  for (double x : v) residual += x - mean;
  mean += residual / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean / dt, sd / std::sqrt(dt)};
}

std::optional<std::size_t> select_optimum(std::span<const SurfacePoint> surface) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < surface.size(); ++i) {
    const auto& p = surface[i];
    if (!p.chi2) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& q = surface[*best];
    const double s = p.chi2->statistic, t = q.chi2->statistic;
    bool better = false;
    if (s != t) {
      better = s < t;
    } else if (std::abs(p.k) != std::abs(q.k)) {
      better = std::abs(p.k) < std::abs(q.k);
    } else if (p.c != q.c) {
      better = p.c < q.c;
    } else {
      better = p.k < q.k;
    }
    if (better) best = i;
  }
  return best;
}

ChiSquareResult objective(double k, double c, const Histogram& empirical,
                          const ProcessParams& proc, const FitConfig& cfg) {
  FeedbackParams{k, c}.validate();
  cfg.validate();
  const CrnEvaluator eval(empirical, proc, cfg);
  const auto f = eval.f_values(c);
  std::vector<double> scratch;
  return eval.evaluate(k, f, scratch);
}

FitResult fit(const ReturnsSample& empirical, double dt, const FitConfig& cfg) {
  cfg.validate();
  if (empirical.size() < 100) throw_domain("fit needs at least 100 empirical returns");
  const auto est = estimate_mu_sigma(empirical, dt);
  const ProcessParams proc(est.mu, est.sigma, dt, cfg.drift_mode);

  FitResult result;
  result.mu_hat = est.mu;
  result.sigma_hat = est.sigma;
  result.dt = dt;
  result.n_empirical = empirical.size();
  result.config = cfg;
  result.empirical = build_histogram(empirical);

  const CrnEvaluator eval(result.empirical, proc, cfg);
  const auto ks = cfg.k_grid.values();
  const auto cs = cfg.c_grid.values();
  result.surface.resize(ks.size() * cs.size());

  // Columns of constant c share one pass of f_c over the deviates.
  detail::parallel_chunks(
      cs.size(), resolve_threads(cfg.threads, cs.size()),
      [&](std::uint64_t begin, std::uint64_t end) {
        std::vector<double> scratch;
        for (std::uint64_t ci = begin; ci < end; ++ci) {
          const auto f = eval.f_values(cs[ci]);
          for (std::size_t ki = 0; ki < ks.size(); ++ki) {
            auto& point = result.surface[ci * ks.size() + ki];
            point.k = ks[ki];
            point.c = cs[ci];
            try {
              point.chi2 = eval.evaluate(ks[ki], f, scratch);
            } catch (const Error& e) {
              if (e.kind() != ErrorKind::DegenerateBinning) throw;
            }
          }
        }
      });

  const auto best = select_optimum(result.surface);
  if (!best) {
    throw FitFailure("every (K, c) candidate produced degenerate chi-square binning",
                     result.surface);
  }
  result.k_hat = result.surface[*best].k;
  result.c_hat = result.surface[*best].c;
  result.chi2 = *result.surface[*best].chi2;
  result.grid_chi2 = result.chi2;

  const auto gbm = eval.try_evaluate(0.0, cs.front());
  if (!gbm) throw Error(ErrorKind::DegenerateBinning, "GBM reference binning is degenerate");
  result.gbm_chi2 = *gbm;

  if (cfg.refine) {
    const double k_lo = std::max(result.k_hat - cfg.k_grid.step, cfg.k_grid.min);
    const double k_hi = std::min(result.k_hat + cfg.k_grid.step, cfg.k_grid.max);
    const double c_lo = std::max(result.c_hat - cfg.c_grid.step, cfg.c_grid.min);
    const double c_hi = std::min(result.c_hat + cfg.c_grid.step, cfg.c_grid.max);
    double k = result.k_hat;
    double c = result.c_hat;
    auto cost = [&](double kk, double cc) { return statistic_or_inf(eval.try_evaluate(kk, cc)); };
    for (int round = 0; round < 20; ++round) {
      const double k_next = golden_section([&](double kk) { return cost(kk, c); }, k_lo, k_hi,
                                           cfg.refine_tolerance);
      const double c_next = golden_section([&](double cc) { return cost(k_next, cc); }, c_lo,
                                           c_hi, cfg.refine_tolerance);
      const bool converged = std::abs(k_next - k) < cfg.refine_tolerance &&
                             std::abs(c_next - c) < cfg.refine_tolerance;
      k = k_next;
      c = c_next;
      if (converged) break;
    }
    const auto refined = eval.try_evaluate(k, c);
    if (refined && refined->statistic < result.chi2.statistic) {
      result.k_hat = k;
      result.c_hat = c;
      result.chi2 = *refined;
      result.refined = true;
    }
  }
  return result;
}

}  // namespace ifbm
