#include "ifbm/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ifbm/error.hpp"

namespace ifbm {

namespace {

void require_increasing(std::span<const double> edges) {
  if (edges.size() < 2) throw_domain("histogram needs at least two edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!std::isfinite(edges[i])) throw_domain("histogram edges must be finite");
    if (i > 0 && !(edges[i] > edges[i - 1])) {
      std::ostringstream msg;
      msg << "histogram edges must be strictly increasing (edge " << i << ")";
      throw_domain(msg.str());
    }
  }
}

// Linear-interpolation quantile on sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<double> freedman_diaconis_edges(std::span<const double> values,
                                            const FreedmanDiaconis& rule) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();
  const double top = std::nextafter(hi, std::numeric_limits<double>::infinity());
  if (!(hi > lo)) return {lo, top};

  const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
  std::size_t bins = 1;
  if (iqr > 0.0) {
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
    bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
  } else {
    // Sturges fallback for samples whose middle half is a single value.
    bins = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(sorted.size())))) + 1;
  }
  bins = std::clamp<std::size_t>(bins, 1, std::max<std::size_t>(rule.max_bins, 1));

  std::vector<double> edges(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i < bins; ++i) edges[i] = lo + width * static_cast<double>(i);
  edges[bins] = top;
  // Rounding can collapse neighbouring edges for extremely narrow ranges.
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace

Histogram bin_on_edges(std::span<const double> values, std::span<const double> edges) {
  require_increasing(edges);
  Histogram h;
  h.edges.assign(edges.begin(), edges.end());
  h.counts.assign(edges.size() - 1, 0);
  h.total = values.size();
  for (double v : values) {
    if (v < edges.front()) {
      ++h.underflow;
    } else if (!(v < edges.back())) {
      ++h.overflow;
    } else {
      const auto it = std::upper_bound(edges.begin(), edges.end(), v);
      ++h.counts[static_cast<std::size_t>(it - edges.begin()) - 1];
    }
  }
  return h;
}

Histogram build_histogram(const ReturnsSample& sample, const BinningRule& rule) {
  if (sample.empty()) throw_domain("cannot build a histogram of an empty sample");
  const auto values = sample.values();
  return std::visit(
      [&](const auto& r) -> Histogram {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, FreedmanDiaconis>) {
          return bin_on_edges(values, freedman_diaconis_edges(values, r));
        } else if constexpr (std::is_same_v<T, UniformBins>) {
          if (r.bins == 0 || !(r.lo < r.hi)) throw_domain("uniform binning needs lo < hi and bins > 0");
          std::vector<double> edges(r.bins + 1);
          for (std::size_t i = 0; i <= r.bins; ++i) {
            edges[i] = r.lo + (r.hi - r.lo) * (static_cast<double>(i) / static_cast<double>(r.bins));
          }
          edges.back() = r.hi;
          return bin_on_edges(values, edges);
        } else {
          return bin_on_edges(values, r.edges);
        }
      },
      rule);
}

MomentSet sample_moments(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 4) throw_domain("sample moments need at least 4 values");
  const double nd = static_cast<double>(n);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= nd;
  double residual = 0.0;
  for (double v : values) residual += v - mean;
  mean += residual / nd;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= nd;
  m3 /= nd;
  m4 /= nd;

  MomentSet out;
  out.n = n;
  out.mean = mean;
  out.variance = m2 * nd / (nd - 1.0);
  if (m2 > 0.0) {
    const double g1 = m3 / std::pow(m2, 1.5);
    const double g2 = m4 / (m2 * m2) - 3.0;
    out.skewness = std::sqrt(nd * (nd - 1.0)) / (nd - 2.0) * g1;
    out.excess_kurtosis = (nd - 1.0) / ((nd - 2.0) * (nd - 3.0)) * ((nd + 1.0) * g2 + 6.0);
  }
  return out;
}

MomentSet sample_moments(const ReturnsSample& sample) { return sample_moments(sample.values()); }

ChiSquareResult chi_square_counts(std::span<const double> observed,
                                  std::span<const double> expected, unsigned fitted_params) {
  if (observed.size() != expected.size()) throw_domain("observed and expected bin counts differ in size");
  std::vector<double> obs_groups;
  std::vector<double> exp_groups;
  double obs_acc = 0.0, exp_acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    obs_acc += observed[i];
    exp_acc += expected[i];
    if (exp_acc >= kMinExpectedCount) {
      obs_groups.push_back(obs_acc);
      exp_groups.push_back(exp_acc);
      obs_acc = exp_acc = 0.0;
    }
  }
  if (obs_acc > 0.0 || exp_acc > 0.0) {
    if (exp_groups.empty()) {
      obs_groups.push_back(obs_acc);
      exp_groups.push_back(exp_acc);
    } else {
      obs_groups.back() += obs_acc;
      exp_groups.back() += exp_acc;
    }
  }
  const std::size_t effective = exp_groups.size();
  if (effective < 2 || effective <= 1 + fitted_params) {
    std::ostringstream msg;
    msg << "chi-square binning is degenerate: " << effective
        << " effective bin(s) after merging, " << fitted_params << " fitted parameter(s)";
    throw Error(ErrorKind::DegenerateBinning, msg.str());
  }
  ChiSquareResult out;
  for (std::size_t i = 0; i < effective; ++i) {
    const double d = obs_groups[i] - exp_groups[i];
    out.statistic += d * d / exp_groups[i];
  }
  out.effective_bins = effective;
  out.merged_bins = observed.size() - effective;
  out.dof = effective - 1 - fitted_params;
  out.p_value = chi_square_survival(out.statistic, static_cast<double>(out.dof));
  return out;
}

namespace {

std::vector<double> folded_counts(const Histogram& h) {
  std::vector<double> out(h.counts.begin(), h.counts.end());
  if (out.empty()) throw_domain("histogram has no bins");
  out.front() += static_cast<double>(h.underflow);
  out.back() += static_cast<double>(h.overflow);
  return out;
}

}  // namespace

ChiSquareResult chi_square(const Histogram& observed, const Histogram& expected,
                           unsigned fitted_params) {
  if (observed.edges != expected.edges) throw_domain("chi-square histograms must share edges");
  if (expected.total == 0) throw_domain("expected histogram is empty");
  const auto obs = folded_counts(observed);
  auto exp = folded_counts(expected);
  const double scale = static_cast<double>(observed.total) / static_cast<double>(expected.total);
  for (double& e : exp) e *= scale;
  return chi_square_counts(obs, exp, fitted_params);
}

ChiSquareResult chi_square(const Histogram& observed,
                           std::span<const double> expected_probabilities,
                           unsigned fitted_params) {
  if (expected_probabilities.size() != observed.bins()) {
    throw_domain("expected probability vector must have one entry per bin");
  }
  double total_p = 0.0;
  for (double p : expected_probabilities) {
    if (!std::isfinite(p) || p < 0.0) throw_domain("expected probabilities must be non-negative");
    total_p += p;
  }
  if (!(total_p > 0.0)) throw_domain("expected probabilities sum to zero");
  const auto obs = folded_counts(observed);
  std::vector<double> exp(expected_probabilities.size());
  const double n = static_cast<double>(observed.total);
  for (std::size_t i = 0; i < exp.size(); ++i) exp[i] = expected_probabilities[i] * n;
  return chi_square_counts(obs, exp, fitted_params);
}

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw_domain("incomplete gamma needs a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  constexpr double eps = 1e-16;
  constexpr int max_iter = 10000;
  if (x < a + 1.0) {
    // Series for P(a, x).
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < max_iter; ++n) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * eps) break;
    }
    return std::clamp(1.0 - sum * std::exp(log_prefix), 0.0, 1.0);
  }
  // Modified Lentz continued fraction for Q(a, x).
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= max_iter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) break;
  }
  return std::clamp(std::exp(log_prefix) * h, 0.0, 1.0);
}

double chi_square_survival(double statistic, double dof) {
  if (!(dof > 0.0)) throw_domain("chi-square dof must be positive");
  if (!(statistic >= 0.0)) throw_domain("chi-square statistic must be non-negative");
  return regularized_gamma_q(0.5 * dof, 0.5 * statistic);
}

}  // namespace ifbm
