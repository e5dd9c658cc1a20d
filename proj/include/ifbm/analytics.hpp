#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "ifbm/engine.hpp"
#include "ifbm/feedback.hpp"

namespace ifbm {

/// Half-open bins [edges[i], edges[i+1]). Values below edges.front() go to
/// underflow, values at or above edges.back() to overflow.
struct Histogram {
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;

  std::size_t bins() const { return counts.size(); }
};

/// Bin width 2 IQR n^(-1/3) spanning [min, max] of the sample.
struct FreedmanDiaconis {
  std::size_t max_bins = 10000;
};

struct UniformBins {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t bins = 1;
};

struct ExplicitEdges {
  std::vector<double> edges;
};

using BinningRule = std::variant<FreedmanDiaconis, UniformBins, ExplicitEdges>;

Histogram build_histogram(const ReturnsSample& sample,
                          const BinningRule& rule = FreedmanDiaconis{});

/// Tallies `values` on fixed, strictly increasing edges.
Histogram bin_on_edges(std::span<const double> values, std::span<const double> edges);

struct MomentSet {
  double mean = 0.0;
  double variance = 0.0;
  /// Empty when the variance is zero.
  std::optional<double> skewness;
  std::optional<double> excess_kurtosis;
  /// Sample size, or empty for quadrature ("exact") moments.
  std::optional<std::uint64_t> n;

  bool exact() const { return !n.has_value(); }
};

/// Unbiased mean and variance; adjusted Fisher-Pearson skewness G1 and
/// bias-corrected excess kurtosis G2. Requires n >= 4.
MomentSet sample_moments(std::span<const double> values);
MomentSet sample_moments(const ReturnsSample& sample);

/// Moments of r(Z) = step_log_return(Z) for Z ~ N(0, 1) by Gauss-Hermite
/// quadrature (64 nodes doubling up to 1024 until every moment is stable to
/// 1e-10). K = 0 short-circuits to the affine-normal closed form.
MomentSet exact_step_moments(const ProcessParams& proc, const FeedbackParams& fb);

/// P(|r - drift dt| < half_width) for r = step_log_return(Z), Z ~ N(0, 1).
/// Integrates the normal density exactly over the level set of r, whose
/// endpoints are located by scanning and bisection.
double central_mass(const ProcessParams& proc, const FeedbackParams& fb, double half_width);

/// P(|r - drift dt| > threshold).
double tail_mass(const ProcessParams& proc, const FeedbackParams& fb, double threshold);

struct ChiSquareResult {
  double statistic = 0.0;
  std::uint64_t dof = 0;
  /// Number of original bins absorbed by merging (bins - effective_bins).
  std::uint64_t merged_bins = 0;
  std::uint64_t effective_bins = 0;
  double p_value = 1.0;
};

inline constexpr double kMinExpectedCount = 5.0;

/// Pearson chi-square of `observed` against `expected` scaled to the observed
/// total. Both histograms must share edges; underflow and overflow fold into
/// the first and last bins. Adjacent bins merge left to right until each
/// expected count reaches 5; a short remainder joins the last group.
ChiSquareResult chi_square(const Histogram& observed, const Histogram& expected,
                           unsigned fitted_params);

/// Same, with expected bin probabilities (end bins include the tails).
ChiSquareResult chi_square(const Histogram& observed,
                           std::span<const double> expected_probabilities,
                           unsigned fitted_params);

/// Chi-square test over raw count vectors (no folding); exposed for reuse.
ChiSquareResult chi_square_counts(std::span<const double> observed,
                                  std::span<const double> expected, unsigned fitted_params);

/// Regularized upper incomplete gamma Q(a, x).
double regularized_gamma_q(double a, double x);

/// P(X > statistic) for X ~ chi^2(dof).
double chi_square_survival(double statistic, double dof);

/// Probabilists' Gauss-Hermite rule: sum_i w_i g(x_i) ~= E[g(Z)], weights
/// summing to one. Golub-Welsch on the symmetric Jacobi matrix.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussHermiteRule gauss_hermite(std::size_t n);

/// Standard normal CDF via erfc.
double normal_cdf(double x);

}  // namespace ifbm
