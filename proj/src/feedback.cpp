#include "ifbm/feedback.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ifbm/error.hpp"

namespace ifbm {

namespace {

void require_shape(double c) {
  if (!std::isfinite(c) || c <= 0.0) {
    std::ostringstream msg;
    msg << "shape parameter c must satisfy c > 0 (got " << c << ")";
    throw_domain(msg.str());
  }
}

void require_finite_z(double z) {
  if (!std::isfinite(z)) throw_domain("z must be finite");
}

double envelope(double z, double c) { return 2.0 * std::exp(-0.5 * c * z * z) - 1.0; }

}  // namespace

void FeedbackParams::validate() const {
  if (!std::isfinite(k)) throw_domain("feedback weight K must be finite");
  require_shape(c);
}

double eval_f(double z, double c) {
  require_shape(c);
  require_finite_z(z);
  return envelope(z, c) * std::atan(z);
}

double eval_feedback(double z, const FeedbackParams& params) {
  params.validate();
  require_finite_z(z);
  if (params.k == 0.0) return 0.0;
  return params.k * (envelope(z, params.c) * std::atan(z));
}

double eval_f_derivative(double z, double c) {
  require_shape(c);
  require_finite_z(z);
  const double gauss = std::exp(-0.5 * c * z * z);
  return -2.0 * c * z * gauss * std::atan(z) + (2.0 * gauss - 1.0) / (1.0 + z * z);
}

double find_root(double c) {
  require_shape(c);
  return std::sqrt(2.0 * std::numbers::ln2 / c);
}

double find_stationary(double c) {
  const double root = find_root(c);
  double lo = 1e-6;
  double hi = root - 1e-6;
  double d_lo = eval_f_derivative(lo, c);
  const double d_hi = eval_f_derivative(hi, c);
  if (!(hi > lo) || !(d_lo > 0.0) || !(d_hi < 0.0)) {
    std::ostringstream msg;
    msg << "stationary point not bracketed for c = " << c;
    throw_numerical(msg.str());
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double d_mid = eval_f_derivative(mid, c);
    if (d_mid == 0.0) return mid;
    if ((d_mid > 0.0) == (d_lo > 0.0)) {
      lo = mid;
      d_lo = d_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

CriticalPoints critical_points(double c) {
  return CriticalPoints{find_root(c), find_stationary(c)};
}

Region classify_region(double z, const FeedbackParams& params) {
  params.validate();
  require_finite_z(z);
  if (!(params.k < 0.0)) {
    throw Error(ErrorKind::Unsupported,
                "region taxonomy is defined for K < 0 only");
  }
  const auto cp = critical_points(params.c);
  const double a = std::abs(z);
  if (a <= kBoundaryTolerance || std::abs(a - cp.z_stat_pos) <= kBoundaryTolerance ||
      std::abs(a - cp.z_root_pos) <= kBoundaryTolerance) {
    return Region::Boundary;
  }
  if (z > 0.0) {
    if (a < cp.z_stat_pos) return Region::Region1;
    if (a < cp.z_root_pos) return Region::Region2;
    return Region::Region3;
  }
  if (a < cp.z_stat_pos) return Region::Region4;
  if (a < cp.z_root_pos) return Region::Region5;
  return Region::Region6;
}

FeedbackSign feedback_sign(double z, const FeedbackParams& params) {
  params.validate();
  require_finite_z(z);
  if (params.k == 0.0) return FeedbackSign::Zero;
  const double a = std::abs(z);
  if (a <= kBoundaryTolerance ||
      std::abs(a - find_root(params.c)) <= kBoundaryTolerance) {
    return FeedbackSign::Zero;
  }
  const double product = z * params.k * eval_f(z, params.c);
  if (product < 0.0) return FeedbackSign::Negative;
  if (product > 0.0) return FeedbackSign::Positive;
  return FeedbackSign::Zero;
}

std::string_view to_string(Region region) {
  switch (region) {
    case Region::Boundary: return "boundary";
    case Region::Region1: return "region1";
    case Region::Region2: return "region2";
    case Region::Region3: return "region3";
    case Region::Region4: return "region4";
    case Region::Region5: return "region5";
    case Region::Region6: return "region6";
  }
  return "unknown";
}

std::string_view to_string(FeedbackSign sign) {
  switch (sign) {
    case FeedbackSign::Negative: return "negative";
    case FeedbackSign::Zero: return "zero";
    case FeedbackSign::Positive: return "positive";
  }
  return "unknown";
}

bool is_negative_feedback_region(Region region) {
  return region == Region::Region1 || region == Region::Region2 ||
         region == Region::Region4 || region == Region::Region5;
}

namespace {

std::vector<double> linspace(double z_min, double z_max, std::size_t n_points) {
  if (!std::isfinite(z_min) || !std::isfinite(z_max) || !(z_min < z_max)) {
    throw_domain("z range requires finite z_min < z_max");
  }
  if (n_points < 2) throw_domain("z grid needs at least 2 points");
  std::vector<double> z(n_points);
  const double span = z_max - z_min;
  const double denom = static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) {
    z[i] = z_min + span * (static_cast<double>(i) / denom);
  }
  z.back() = z_max;
  return z;
}

}  // namespace

Curve emit_curve(const FeedbackParams& params, double z_min, double z_max,
                 std::size_t n_points) {
  params.validate();
  Curve curve;
  curve.params = params;
  curve.z = linspace(z_min, z_max, n_points);
  curve.critical = critical_points(params.c);
  curve.value.reserve(n_points);
  // Adding +0.0 turns -0 into 0.
  for (double z : curve.z) curve.value.push_back(eval_feedback(z, params) + 0.0);
  if (params.k < 0.0) {
    curve.regions.reserve(n_points);
    for (double z : curve.z) curve.regions.push_back(classify_region(z, params));
  }
  return curve;
}

Surface emit_surface(const FeedbackParams& params, const ZGrid& grid,
                     std::size_t t_steps) {
  params.validate();
  if (t_steps == 0) throw_domain("surface needs at least one time step");
  Surface surface;
  surface.params = params;
  surface.z = linspace(grid.z_min, grid.z_max, grid.n_points);
  surface.t_steps = t_steps;
  std::vector<double> profile;
  profile.reserve(surface.z.size());
  for (double z : surface.z) profile.push_back(eval_feedback(z, params) + 0.0);
  surface.values.reserve(t_steps * profile.size());
  for (std::size_t t = 0; t < t_steps; ++t) {
    surface.values.insert(surface.values.end(), profile.begin(), profile.end());
  }
  return surface;
}

}  // namespace ifbm
