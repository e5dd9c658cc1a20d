#pragma once

// Feedback function
//
//   f_c(z) = (2 exp(-c z^2 / 2) - 1) * arctan(z)
//
// and its K-weighted form K f_c(z). Everything here is a pure function of its
// arguments.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace ifbm {

/// (K, c) pair. K < 0 is the contrarian regime, K = 0 reduces to GBM; c must
/// be positive so the Gaussian envelope decays.
struct FeedbackParams {
  double k = 0.0;
  double c = 1.0;

  /// Throws Error(Domain) unless K is finite and c is finite and positive.
  void validate() const;
};

enum class Region {
  Boundary,
  Region1,  // (0, z_stat)
  Region2,  // (z_stat, z_root)
  Region3,  // (z_root, inf)
  Region4,  // (-z_stat, 0)
  Region5,  // (-z_root, -z_stat)
  Region6,  // (-inf, -z_root)
};

enum class FeedbackSign { Negative, Zero, Positive };

/// Positive-side root and stationary point; the negative ones follow by odd
/// symmetry. Neither depends on K.
struct CriticalPoints {
  double z_root_pos = 0.0;
  double z_stat_pos = 0.0;
};

/// Absolute tolerance used to snap z onto {0, +-z_stat, +-z_root}.
inline constexpr double kBoundaryTolerance = 1e-12;

double eval_f(double z, double c);
double eval_feedback(double z, const FeedbackParams& params);
double eval_f_derivative(double z, double c);

/// Closed form sqrt(2 ln 2 / c).
double find_root(double c);

/// Bisection on the analytic derivative over (1e-6, z_root - 1e-6).
/// Throws Error(Numerical) if the bracket does not straddle a sign change.
double find_stationary(double c);

CriticalPoints critical_points(double c);

/// Requires K < 0; throws Error(Unsupported) otherwise.
Region classify_region(double z, const FeedbackParams& params);

/// Sign of z * K * f_c(z), snapped to Zero at z in {0, +-z_root}.
FeedbackSign feedback_sign(double z, const FeedbackParams& params);

std::string_view to_string(Region region);
std::string_view to_string(FeedbackSign sign);

/// True for the four regions where z * K f_c(z) < 0 under K < 0.
bool is_negative_feedback_region(Region region);

struct Curve {
  FeedbackParams params;
  std::vector<double> z;
  std::vector<double> value;
  /// One label per point when K < 0, empty otherwise.
  std::vector<Region> regions;
  CriticalPoints critical;
};

Curve emit_curve(const FeedbackParams& params, double z_min, double z_max,
                 std::size_t n_points);

struct ZGrid {
  double z_min = -4.0;
  double z_max = 4.0;
  std::size_t n_points = 801;
};

/// Time-major (t, z) table of K f_c(z). Every time slice holds the same
/// profile.
struct Surface {
  FeedbackParams params;
  std::vector<double> z;
  std::size_t t_steps = 0;
  std::vector<double> values;

  std::span<const double> slice(std::size_t t) const {
    return std::span<const double>(values).subspan(t * z.size(), z.size());
  }
};

Surface emit_surface(const FeedbackParams& params, const ZGrid& grid,
                     std::size_t t_steps);

}  // namespace ifbm
