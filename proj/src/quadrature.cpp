#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "ifbm/analytics.hpp"
#include "ifbm/error.hpp"

namespace ifbm {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

GaussHermiteRule gauss_hermite(std::size_t n) {
  if (n == 0) throw_domain("Gauss-Hermite rule needs at least one node");
  const int size = static_cast<int>(n);
  // Jacobi matrix of the probabilists' Hermite polynomials: zero diagonal,
  // off-diagonal sqrt(k). Implicit QL, tracking only the first component of
  // each eigenvector (all the weights need).
  std::vector<double> d(n, 0.0);
  std::vector<double> e(n, 0.0);
  std::vector<double> first(n, 0.0);
  for (int i = 0; i + 1 < size; ++i) e[i] = std::sqrt(static_cast<double>(i + 1));
  first[0] = 1.0;

  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < size; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < size - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 100) throw_numerical("Gauss-Hermite eigenvalue iteration did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0;
        double c = 1.0;
        double p = 0.0;
        int i = m - 1;
        for (; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          f = first[i + 1];
          first[i + 1] = s * first[i] + c * f;
          first[i] = c * first[i] - s * f;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }

  std::vector<std::pair<double, double>> pairs(n);
  for (std::size_t i = 0; i < n; ++i) pairs[i] = {d[i], first[i] * first[i]};
  std::sort(pairs.begin(), pairs.end());

  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // The rule is symmetric about zero; average mirrored pairs so odd moments
  // of symmetric integrands cancel to rounding.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& lo = pairs[i];
    const auto& hi = pairs[n - 1 - i];
    rule.nodes[i] = 0.5 * (lo.first - hi.first);
    rule.weights[i] = 0.5 * (lo.second + hi.second);
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  return rule;
}

namespace {

constexpr std::array<std::size_t, 5> kNodeSchedule{64, 128, 256, 512, 1024};

const std::array<GaussHermiteRule, kNodeSchedule.size()>& cached_rules() {
  static const auto rules = [] {
    std::array<GaussHermiteRule, kNodeSchedule.size()> out;
    for (std::size_t i = 0; i < kNodeSchedule.size(); ++i) out[i] = gauss_hermite(kNodeSchedule[i]);
    return out;
  }();
  return rules;
}

struct RawMoments {
  double mean;
  double variance;
  double skewness;
  double kurtosis;
};

RawMoments integrate(const GaussHermiteRule& rule, const ProcessParams& proc,
                     const FeedbackParams& fb) {
  std::vector<double> r(rule.nodes.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = step_log_return(rule.nodes[i], proc, fb);
  double mean = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) mean += rule.weights[i] * r[i];
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = r[i] - mean;
    const double d2 = d * d;
    m2 += rule.weights[i] * d2;
    m3 += rule.weights[i] * d2 * d;
    m4 += rule.weights[i] * d2 * d2;
  }
  return {mean, m2, m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

bool stable(double prev, double next, double scale) {
  return std::abs(next - prev) <= 1e-10 * std::max(std::abs(next), scale);
}

}  // namespace

MomentSet exact_step_moments(const ProcessParams& proc, const FeedbackParams& fb) {
  fb.validate();
  MomentSet out;
  if (fb.k == 0.0) {
    out.mean = proc.drift() * proc.dt();
    out.variance = proc.sigma() * proc.sigma() * proc.dt();
    if (out.variance > 0.0) {
      out.skewness = 0.0;
      out.excess_kurtosis = 0.0;
    }
    return out;
  }

  const auto& rules = cached_rules();
  RawMoments prev = integrate(rules[0], proc, fb);
  for (std::size_t i = 1; i < rules.size(); ++i) {
    const RawMoments next = integrate(rules[i], proc, fb);
    const double spread = std::sqrt(next.variance);
    if (stable(prev.mean, next.mean, spread) && stable(prev.variance, next.variance, 0.0) &&
        stable(prev.skewness, next.skewness, 1.0) && stable(prev.kurtosis, next.kurtosis, 1.0)) {
      out.mean = next.mean;
      out.variance = next.variance;
      out.skewness = next.skewness;
      out.excess_kurtosis = next.kurtosis;
      return out;
    }
    prev = next;
  }
  throw_numerical("Gauss-Hermite moments did not converge within 1024 nodes");
}

namespace {

// Normal mass on (a, b), computed from the nearer tail for accuracy.
double normal_mass(double a, double b) {
  if (!(b > a)) return 0.0;
  if (a >= 0.0) return 0.5 * (std::erfc(a / std::numbers::sqrt2) - std::erfc(b / std::numbers::sqrt2));
  if (b <= 0.0) return 0.5 * (std::erfc(-b / std::numbers::sqrt2) - std::erfc(-a / std::numbers::sqrt2));
  return 1.0 - normal_cdf(a) - 0.5 * std::erfc(b / std::numbers::sqrt2);
}

struct LevelSet {
  // Alternating boundaries of {z : |g(z)| < a}; +-inf at the ends when the
  // set is unbounded.
  std::vector<std::pair<double, double>> inside;
};

LevelSet level_set(const ProcessParams& proc, const FeedbackParams& fb, double a) {
  if (!std::isfinite(a) || a <= 0.0) throw_domain("band half-width must be positive");
  const double sqrt_dt = std::sqrt(proc.dt());
  const double drift = proc.drift();
  const double f_scale = drift * fb.k * proc.dt();
  auto h = [&](double z) {
    const double g = proc.sigma() * sqrt_dt * z + f_scale * eval_f(z, fb.c);
    return std::abs(g) - a;
  };
  constexpr double kLimit = 12.0;
  constexpr int kCells = 24000;
  constexpr double kStep = 2.0 * kLimit / kCells;

  LevelSet out;
  double z_prev = -kLimit;
  double h_prev = h(z_prev);
  bool in = h_prev < 0.0;
  double start = -std::numeric_limits<double>::infinity();
  for (int i = 1; i <= kCells; ++i) {
    const double z = -kLimit + kStep * i;
    const double hz = h(z);
    if ((hz < 0.0) != (h_prev < 0.0)) {
      double lo = z_prev, hi = z;
      const bool lo_inside = h_prev < 0.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((h(mid) < 0.0) == lo_inside) lo = mid; else hi = mid;
      }
      const double crossing = 0.5 * (lo + hi);
      if (in) {
        out.inside.emplace_back(start, crossing);
      } else {
        start = crossing;
      }
      in = !in;
    }
    z_prev = z;
    h_prev = hz;
  }
  if (in) out.inside.emplace_back(start, std::numeric_limits<double>::infinity());
  return out;
}

}  // namespace

double central_mass(const ProcessParams& proc, const FeedbackParams& fb, double half_width) {
  fb.validate();
  const auto set = level_set(proc, fb, half_width);
  double mass = 0.0;
  for (const auto& [lo, hi] : set.inside) mass += normal_mass(lo, hi);
  return mass;
}

double tail_mass(const ProcessParams& proc, const FeedbackParams& fb, double threshold) {
  fb.validate();
  const auto set = level_set(proc, fb, threshold);
  double mass = 0.0;
  double from = -std::numeric_limits<double>::infinity();
  for (const auto& [lo, hi] : set.inside) {
    mass += normal_mass(from, lo);
    from = hi;
  }
  mass += normal_mass(from, std::numeric_limits<double>::infinity());
  return mass;
}

}  // namespace ifbm
