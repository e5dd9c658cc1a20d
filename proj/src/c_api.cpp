#include "ifbm/ifbm.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "ifbm/analytics.hpp"
#include "ifbm/calibration.hpp"
#include "ifbm/engine.hpp"
#include "ifbm/error.hpp"
#include "ifbm/feedback.hpp"
#include "ifbm/market_data.hpp"
#include "ifbm/rng.hpp"
#include "ifbm/serialize.hpp"

struct ifbm_curve {
  ifbm::Curve rep;
};

struct ifbm_surface {
  ifbm::Surface rep;
};

struct ifbm_pathset {
  ifbm::PathSet rep;
};

struct ifbm_sample {
  ifbm::ReturnsSample rep;
};

struct ifbm_price_series {
  ifbm::PriceSeries rep;
};

struct ifbm_histogram {
  ifbm::Histogram rep;
};

struct ifbm_fit_result {
  std::optional<ifbm::FitResult> rep;
  std::vector<ifbm::SurfacePoint> failed_surface;
};

namespace {

thread_local std::string last_error;

ifbm_status to_status(ifbm::ErrorKind kind) {
  switch (kind) {
    case ifbm::ErrorKind::Domain: return IFBM_ERROR_DOMAIN;
    case ifbm::ErrorKind::Numerical: return IFBM_ERROR_NUMERICAL;
    case ifbm::ErrorKind::Resource: return IFBM_ERROR_RESOURCE;
    case ifbm::ErrorKind::Unsupported: return IFBM_ERROR_UNSUPPORTED;
    case ifbm::ErrorKind::Io: return IFBM_ERROR_IO;
    case ifbm::ErrorKind::DegenerateBinning: return IFBM_ERROR_DEGENERATE_BINNING;
    case ifbm::ErrorKind::FitFailure: return IFBM_ERROR_FIT_FAILURE;
  }
  return IFBM_ERROR_INTERNAL;
}

ifbm_status fail(ifbm_status status, const char* what) {
  last_error = what;
  return status;
}

template <typename Fn>
ifbm_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return IFBM_OK;
  } catch (const ifbm::Error& e) {
    return fail(to_status(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(IFBM_ERROR_RESOURCE, "out of memory");
  } catch (const std::exception& e) {
    return fail(IFBM_ERROR_INTERNAL, e.what());
  } catch (...) {
    return fail(IFBM_ERROR_INTERNAL, "unknown error");
  }
}

#define IFBM_REQUIRE(ptr)                                                    \
  do {                                                                       \
    if ((ptr) == nullptr) return fail(IFBM_ERROR_INVALID_ARGUMENT, #ptr " is NULL"); \
  } while (0)

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string_view metadata_view(const char* metadata_json) {
  return metadata_json ? std::string_view(metadata_json) : std::string_view();
}

ifbm::Json with_metadata(ifbm::Json doc, const char* metadata_json) {
  auto meta = ifbm::parse_metadata(metadata_view(metadata_json));
  if (meta.empty()) return doc;
  ifbm::Json out;
  out["metadata"] = std::move(meta);
  for (auto& [key, value] : doc.items()) out[key] = value;
  return out;
}

ifbm::DriftMode to_mode(ifbm_drift_mode mode) {
  switch (mode) {
    case IFBM_DRIFT_MU_SCALED: return ifbm::DriftMode::MuScaled;
    case IFBM_DRIFT_ALPHA_SCALED: return ifbm::DriftMode::AlphaScaled;
  }
  throw ifbm::Error(ifbm::ErrorKind::Domain, "unknown drift mode");
}

ifbm::ProcessParams to_process(const ifbm_process& p) {
  return ifbm::ProcessParams(p.mu, p.sigma, p.dt, to_mode(p.drift_mode));
}

ifbm::SimConfig to_sim_config(const ifbm_sim_config& c) {
  ifbm::SimConfig cfg;
  cfg.n_paths = c.n_paths;
  cfg.n_steps = c.n_steps;
  cfg.master_seed = c.master_seed;
  cfg.initial_price = c.initial_price;
  cfg.threads = c.threads;
  cfg.sample_cap = c.sample_cap;
  cfg.materialize_prices = c.materialize_prices != 0;
  return cfg;
}

ifbm::FitConfig to_fit_config(const ifbm_fit_config& c) {
  ifbm::FitConfig cfg;
  cfg.k_grid = {c.k_min, c.k_max, c.k_step};
  cfg.c_grid = {c.c_min, c.c_max, c.c_step};
  cfg.mc_paths = c.mc_paths;
  cfg.mc_steps = c.mc_steps;
  cfg.seed = c.seed;
  cfg.refine = c.refine != 0;
  cfg.threads = c.threads;
  cfg.sample_cap = c.sample_cap;
  cfg.drift_mode = to_mode(c.drift_mode);
  return cfg;
}

void fill_moments(const ifbm::MomentSet& m, ifbm_moments* out) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out->mean = m.mean;
  out->variance = m.variance;
  out->skewness = m.skewness.value_or(nan);
  out->excess_kurtosis = m.excess_kurtosis.value_or(nan);
  out->n = m.n.value_or(0);
  out->exact = m.exact() ? 1 : 0;
  out->shape_defined = m.skewness.has_value() ? 1 : 0;
}

ifbm::MomentSet from_moments(const ifbm_moments& m) {
  ifbm::MomentSet out;
  out.mean = m.mean;
  out.variance = m.variance;
  if (m.shape_defined) {
    out.skewness = m.skewness;
    out.excess_kurtosis = m.excess_kurtosis;
  }
  if (!m.exact) out.n = m.n;
  return out;
}

void fill_chi(const ifbm::ChiSquareResult& r, ifbm_chi_square* out) {
  out->statistic = r.statistic;
  out->dof = r.dof;
  out->effective_bins = r.effective_bins;
  out->merged_bins = r.merged_bins;
  out->p_value = r.p_value;
}

ifbm::ColumnRef parse_column(const char* text) {
  std::string s(text);
  if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) {
    return static_cast<std::size_t>(std::stoull(s));
  }
  return s;
}

ifbm::Format to_format(ifbm_format f) {
  if (f == IFBM_FORMAT_CSV) return ifbm::Format::Csv;
  if (f == IFBM_FORMAT_JSON) return ifbm::Format::Json;
  throw ifbm::Error(ifbm::ErrorKind::Domain, "unknown output format");
}

}  // namespace

extern "C" {

const char* ifbm_version(void) { return IFBM_VERSION_STRING; }

const char* ifbm_last_error(void) { return last_error.c_str(); }

const char* ifbm_status_name(ifbm_status status) {
  switch (status) {
    case IFBM_OK: return "ok";
    case IFBM_ERROR_DOMAIN: return "domain error";
    case IFBM_ERROR_NUMERICAL: return "numerical error";
    case IFBM_ERROR_RESOURCE: return "resource error";
    case IFBM_ERROR_UNSUPPORTED: return "unsupported regime";
    case IFBM_ERROR_IO: return "input/output error";
    case IFBM_ERROR_DEGENERATE_BINNING: return "degenerate binning";
    case IFBM_ERROR_FIT_FAILURE: return "fit failure";
    case IFBM_ERROR_INVALID_ARGUMENT: return "invalid argument";
    case IFBM_ERROR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void ifbm_string_free(char* text) { std::free(text); }

/* feedback */

ifbm_status ifbm_eval_f(double z, double c, double* out) {
  IFBM_REQUIRE(out);
  return guarded([&] { *out = ifbm::eval_f(z, c); });
}

ifbm_status ifbm_eval_feedback(double z, double k, double c, double* out) {
  IFBM_REQUIRE(out);
  return guarded([&] { *out = ifbm::eval_feedback(z, {k, c}); });
}

ifbm_status ifbm_eval_f_derivative(double z, double c, double* out) {
  IFBM_REQUIRE(out);
  return guarded([&] { *out = ifbm::eval_f_derivative(z, c); });
}

ifbm_status ifbm_find_root(double c, double* out) {
  IFBM_REQUIRE(out);
  return guarded([&] { *out = ifbm::find_root(c); });
}

ifbm_status ifbm_find_stationary(double c, double* out) {
  IFBM_REQUIRE(out);
  return guarded([&] { *out = ifbm::find_stationary(c); });
}

ifbm_status ifbm_classify_region(double z, double k, double c, ifbm_region* out) {
  IFBM_REQUIRE(out);
  return guarded([&] {
    switch (ifbm::classify_region(z, {k, c})) {
      case ifbm::Region::Boundary: *out = IFBM_REGION_BOUNDARY; break;
      case ifbm::Region::Region1: *out = IFBM_REGION_1; break;
      case ifbm::Region::Region2: *out = IFBM_REGION_2; break;
      case ifbm::Region::Region3: *out = IFBM_REGION_3; break;
      case ifbm::Region::Region4: *out = IFBM_REGION_4; break;
      case ifbm::Region::Region5: *out = IFBM_REGION_5; break;
      case ifbm::Region::Region6: *out = IFBM_REGION_6; break;
    }
  });
}

ifbm_status ifbm_feedback_sign(double z, double k, double c, ifbm_sign* out) {
  IFBM_REQUIRE(out);
  return guarded([&] {
    switch (ifbm::feedback_sign(z, {k, c})) {
      case ifbm::FeedbackSign::Negative: *out = IFBM_SIGN_NEGATIVE; break;
      case ifbm::FeedbackSign::Zero: *out = IFBM_SIGN_ZERO; break;
      case ifbm::FeedbackSign::Positive: *out = IFBM_SIGN_POSITIVE; break;
    }
  });
}

ifbm_status ifbm_critical_points_json(double k, double c, const char* metadata_json, char** out) {
  IFBM_REQUIRE(out);
  return guarded([&] {
    *out = copy_string(ifbm::to_text(with_metadata(ifbm::critical_points_json({k, c}), metadata_json)));
  });
}

ifbm_status ifbm_curve_create(double k, double c, double z_min, double z_max, size_t n_points,
                              ifbm_curve** out) {
  IFBM_REQUIRE(out);
  return guarded([&] {
    *out = new ifbm_curve{ifbm::emit_curve({k, c}, z_min, z_max, n_points)};
  });
}

void ifbm_curve_destroy(ifbm_curve* curve) { delete curve; }

size_t ifbm_curve_size(const ifbm_curve* curve) { return curve ? curve->rep.z.size() : 0; }

ifbm_status ifbm_curve_point(const ifbm_curve* curve, size_t index, double* z, double* value) {
  IFBM_REQUIRE(curve);
  if (index >= curve->rep.z.size()) return fail(IFBM_ERROR_INVALID_ARGUMENT, "curve index out of range");
  if (z) *z = curve->rep.z[index];
  if (value) *value = curve->rep.value[index];
  return IFBM_OK;
}

ifbm_status ifbm_curve_serialize(const ifbm_curve* curve, ifbm_format format,
                                 const char* metadata_json, char** out) {
  IFBM_REQUIRE(curve);
  IFBM_REQUIRE(out);
  return guarded([&] {
    if (to_format(format) == ifbm::Format::Csv) {
      *out = copy_string(ifbm::curve_csv(curve->rep));
    } else {
      *out = copy_string(ifbm::to_text(with_metadata(ifbm::curve_json(curve->rep), metadata_json)));
    }
  });
}

ifbm_status ifbm_surface_create(double k, double c, double z_min, double z_max, size_t n_points,
                                size_t t_steps, ifbm_surface** out) {
  IFBM_REQUIRE(out);
  return guarded([&] {
    *out = new ifbm_surface{ifbm::emit_surface({k, c}, {z_min, z_max, n_points}, t_steps)};
  });
}

void ifbm_surface_destroy(ifbm_surface* surface) { delete surface; }

size_t ifbm_surface_time_steps(const ifbm_surface* surface) {
  return surface ? surface->rep.t_steps : 0;
}

size_t ifbm_surface_grid_size(const ifbm_surface* surface) {
  return surface ? surface->rep.z.size() : 0;
}

ifbm_status ifbm_surface_value(const ifbm_surface* surface, size_t t, size_t index, double* value) {
  IFBM_REQUIRE(surface);
  IFBM_REQUIRE(value);
  if (t >= surface->rep.t_steps || index >= surface->rep.z.size()) {
    return fail(IFBM_ERROR_INVALID_ARGUMENT, "surface index out of range");
  }
  *value = surface->rep.slice(t)[index];
  return IFBM_OK;
}

ifbm_status ifbm_surface_serialize(const ifbm_surface* surface, ifbm_format format,
                                   const char* metadata_json, char** out) {
  IFBM_REQUIRE(surface);
  IFBM_REQUIRE(out);
  return guarded([&] {
    if (to_format(format) == ifbm::Format::Csv) {
      *out = copy_string(ifbm::surface_csv(surface->rep));
    } else {
      *out = copy_string(ifbm::to_text(with_metadata(ifbm::surface_json(surface->rep), metadata_json)));
    }
  });
}

/* engine */

void ifbm_sim_config_init(ifbm_sim_config* cfg) {
  if (!cfg) return;
  const ifbm::SimConfig defaults;
  cfg->n_paths = defaults.n_paths;
  cfg->n_steps = defaults.n_steps;
  cfg->master_seed = defaults.master_seed;
  cfg->initial_price = defaults.initial_price;
  cfg->threads = defaults.threads;
  cfg->sample_cap = defaults.sample_cap;
  cfg->materialize_prices = defaults.materialize_prices ? 1 : 0;
}

ifbm_status ifbm_step_log_return(double z, const ifbm_process* proc, double k, double c,
                                 double* out) {
  IFBM_REQUIRE(proc);
  IFBM_REQUIRE(out);
  return guarded([&] { *out = ifbm::step_log_return(z, to_process(*proc), {k, c}); });
}

ifbm_status ifbm_normal_stream(uint64_t master_seed, uint64_t path_index, uint64_t offset,
                               double* out, size_t n) {
  if (n > 0) IFBM_REQUIRE(out);
  return guarded([&] {
    const ifbm::NormalStream stream(master_seed, path_index);
    for (size_t i = 0; i < n; ++i) out[i] = stream.at(offset + i);
  });
}

ifbm_status ifbm_simulate(const ifbm_process* proc, double k, double c, const ifbm_sim_config* cfg,
                          ifbm_pathset** out) {
  IFBM_REQUIRE(proc);
  IFBM_REQUIRE(cfg);
  IFBM_REQUIRE(out);
  return guarded([&] {
    *out = new ifbm_pathset{ifbm::simulate(to_process(*proc), {k, c}, to_sim_config(*cfg))};
  });
}

ifbm_status ifbm_simulate_gbm(const ifbm_process* proc, const ifbm_sim_config* cfg,
                              ifbm_pathset** out) {
  IFBM_REQUIRE(proc);
  IFBM_REQUIRE(cfg);
  IFBM_REQUIRE(out);
  return guarded([&] {
    *out = new ifbm_pathset{ifbm::simulate_gbm(to_process(*proc), to_sim_config(*cfg))};
  });
}

void ifbm_pathset_destroy(ifbm_pathset* paths) { delete paths; }

uint64_t ifbm_pathset_paths(const ifbm_pathset* paths) { return paths ? paths->rep.n_paths() : 0; }

uint64_t ifbm_pathset_steps(const ifbm_pathset* paths) { return paths ? paths->rep.n_steps() : 0; }

const double* ifbm_pathset_log_returns(const ifbm_pathset* paths) {
  return paths ? paths->rep.log_returns().data() : nullptr;
}

const double* ifbm_pathset_prices(const ifbm_pathset* paths) {
  return paths && paths->rep.has_prices() ? paths->rep.prices().data() : nullptr;
}

ifbm_status ifbm_pathset_serialize(const ifbm_pathset* paths, ifbm_format format,
                                   const char* metadata_json, char** out) {
  IFBM_REQUIRE(paths);
  IFBM_REQUIRE(out);
  return guarded([&] {
    if (to_format(format) == ifbm::Format::Csv) {
      *out = copy_string(ifbm::pathset_csv(paths->rep));
    } else {
      *out = copy_string(ifbm::to_text(with_metadata(ifbm::pathset_json(paths->rep), metadata_json)));
    }
  });
}

ifbm_status ifbm_pathset_provenance_json(const ifbm_pathset* paths, char** out) {
  IFBM_REQUIRE(paths);
  IFBM_REQUIRE(out);
  return guarded([&] { *out = copy_string(ifbm::to_text(ifbm::provenance_json(paths->rep))); });
}

ifbm_status ifbm_pathset_price_csv(const ifbm_pathset* paths, uint64_t path, char** out) {
  IFBM_REQUIRE(paths);
  IFBM_REQUIRE(out);
  return guarded([&] { *out = copy_string(ifbm::price_csv(paths->rep, path)); });
}

ifbm_status ifbm_sample_create(const double* values, size_t n, ifbm_source source,
                               ifbm_sample** out) {
  if (n > 0) IFBM_REQUIRE(values);
  IFBM_REQUIRE(out);
  return guarded([&] {
    const auto src = source == IFBM_SOURCE_SIMULATED ? ifbm::SampleSource::Simulated
                                                     : ifbm::SampleSource::Empirical;
    *out = new ifbm_sample{ifbm::ReturnsSample(std::vector<double>(values, values + n), src)};
  });
}

ifbm_status ifbm_pool_returns(const ifbm_pathset* paths, size_t horizon, ifbm_sample** out) {
  IFBM_REQUIRE(paths);
  IFBM_REQUIRE(out);
  return guarded([&] { *out = new ifbm_sample{ifbm::pool_returns(paths->rep, horizon)}; });
}

ifbm_status ifbm_sample_load(const char* path, ifbm_sample** out) {
  IFBM_REQUIRE(path);
  IFBM_REQUIRE(out);
  return guarded([&] { *out = new ifbm_sample{ifbm::load_returns(path)}; });
}

void ifbm_sample_destroy(ifbm_sample* sample) { delete sample; }

size_t ifbm_sample_size(const ifbm_sample* sample) { return sample ? sample->rep.size() : 0; }

const double* ifbm_sample_values(const ifbm_sample* sample) {
  return sample ? sample->rep.values().data() : nullptr;
}

ifbm_status ifbm_sample_serialize(const ifbm_sample* sample, ifbm_format format,
                                  const char* metadata_json, char** out) {
  IFBM_REQUIRE(sample);
  IFBM_REQUIRE(out);
  return guarded([&] {
    if (to_format(format) == ifbm::Format::Csv) {
      *out = copy_string(ifbm::sample_csv(sample->rep));
    } else {
      *out = copy_string(ifbm::to_text(with_metadata(ifbm::sample_json(sample->rep), metadata_json)));
    }
  });
}

/* market data */

ifbm_status ifbm_price_series_load_csv(const char* path, const char* price_column,
                                       const char* time_column, ifbm_price_series** out) {
  IFBM_REQUIRE(path);
  IFBM_REQUIRE(price_column);
  IFBM_REQUIRE(out);
  return guarded([&] {
    ifbm::ColumnSpec spec;
    spec.price = parse_column(price_column);
    if (time_column) spec.timestamp = parse_column(time_column);
    *out = new ifbm_price_series{ifbm::load_csv(path, spec)};
  });
}

void ifbm_price_series_destroy(ifbm_price_series* series) { delete series; }

size_t ifbm_price_series_size(const ifbm_price_series* series) {
  return series ? series->rep.size() : 0;
}

const double* ifbm_price_series_prices(const ifbm_price_series* series) {
  return series ? series->rep.prices.data() : nullptr;
}

ifbm_status ifbm_log_returns(const ifbm_price_series* series, ifbm_sample** out) {
  IFBM_REQUIRE(series);
  IFBM_REQUIRE(out);
  return guarded([&] { *out = new ifbm_sample{ifbm::log_returns(series->rep)}; });
}

/* analytics */

ifbm_status ifbm_sample_moments(const ifbm_sample* sample, ifbm_moments* out) {
  IFBM_REQUIRE(sample);
  IFBM_REQUIRE(out);
  return guarded([&] { fill_moments(ifbm::sample_moments(sample->rep), out); });
}

ifbm_status ifbm_exact_step_moments(const ifbm_process* proc, double k, double c,
                                    ifbm_moments* out) {
  IFBM_REQUIRE(proc);
  IFBM_REQUIRE(out);
  return guarded([&] { fill_moments(ifbm::exact_step_moments(to_process(*proc), {k, c}), out); });
}

ifbm_status ifbm_moments_json(const ifbm_moments* moments, const char* metadata_json, char** out) {
  IFBM_REQUIRE(moments);
  IFBM_REQUIRE(out);
  return guarded([&] {
    *out = copy_string(ifbm::to_text(with_metadata(ifbm::to_json(from_moments(*moments)), metadata_json)));
  });
}

ifbm_status ifbm_central_mass(const ifbm_process* proc, double k, double c, double half_width,
                              double* out) {
  IFBM_REQUIRE(proc);
  IFBM_REQUIRE(out);
  return guarded([&] { *out = ifbm::central_mass(to_process(*proc), {k, c}, half_width); });
}

ifbm_status ifbm_tail_mass(const ifbm_process* proc, double k, double c, double threshold,
                           double* out) {
  IFBM_REQUIRE(proc);
  IFBM_REQUIRE(out);
  return guarded([&] { *out = ifbm::tail_mass(to_process(*proc), {k, c}, threshold); });
}

ifbm_status ifbm_histogram_build_fd(const ifbm_sample* sample, ifbm_histogram** out) {
  IFBM_REQUIRE(sample);
  IFBM_REQUIRE(out);
  return guarded([&] { *out = new ifbm_histogram{ifbm::build_histogram(sample->rep)}; });
}

ifbm_status ifbm_histogram_build_uniform(const ifbm_sample* sample, double lo, double hi,
                                         size_t bins, ifbm_histogram** out) {
  IFBM_REQUIRE(sample);
  IFBM_REQUIRE(out);
  return guarded([&] {
    *out = new ifbm_histogram{ifbm::build_histogram(sample->rep, ifbm::UniformBins{lo, hi, bins})};
  });
}

ifbm_status ifbm_histogram_build_edges(const ifbm_sample* sample, const double* edges,
                                       size_t n_edges, ifbm_histogram** out) {
  IFBM_REQUIRE(sample);
  IFBM_REQUIRE(edges);
  IFBM_REQUIRE(out);
  return guarded([&] {
    ifbm::ExplicitEdges rule{std::vector<double>(edges, edges + n_edges)};
    *out = new ifbm_histogram{ifbm::build_histogram(sample->rep, rule)};
  });
}

void ifbm_histogram_destroy(ifbm_histogram* hist) { delete hist; }

size_t ifbm_histogram_bins(const ifbm_histogram* hist) { return hist ? hist->rep.bins() : 0; }

const double* ifbm_histogram_edges(const ifbm_histogram* hist) {
  return hist ? hist->rep.edges.data() : nullptr;
}

const uint64_t* ifbm_histogram_counts(const ifbm_histogram* hist) {
  static_assert(sizeof(std::uint64_t) == sizeof(uint64_t));
  return hist ? hist->rep.counts.data() : nullptr;
}

ifbm_status ifbm_histogram_tallies(const ifbm_histogram* hist, uint64_t* total,
                                   uint64_t* underflow, uint64_t* overflow) {
  IFBM_REQUIRE(hist);
  if (total) *total = hist->rep.total;
  if (underflow) *underflow = hist->rep.underflow;
  if (overflow) *overflow = hist->rep.overflow;
  return IFBM_OK;
}

ifbm_status ifbm_histogram_serialize(const ifbm_histogram* hist, ifbm_format format,
                                     const char* metadata_json, char** out) {
  IFBM_REQUIRE(hist);
  IFBM_REQUIRE(out);
  return guarded([&] {
    if (to_format(format) == ifbm::Format::Csv) {
      *out = copy_string(ifbm::histogram_csv(hist->rep));
    } else {
      *out = copy_string(ifbm::to_text(with_metadata(ifbm::to_json(hist->rep), metadata_json)));
    }
  });
}

ifbm_status ifbm_chi_square_histograms(const ifbm_histogram* observed,
                                       const ifbm_histogram* expected, uint32_t fitted_params,
                                       ifbm_chi_square* out) {
  IFBM_REQUIRE(observed);
  IFBM_REQUIRE(expected);
  IFBM_REQUIRE(out);
  return guarded([&] { fill_chi(ifbm::chi_square(observed->rep, expected->rep, fitted_params), out); });
}

ifbm_status ifbm_chi_square_probabilities(const ifbm_histogram* observed,
                                          const double* probabilities, size_t n,
                                          uint32_t fitted_params, ifbm_chi_square* out) {
  IFBM_REQUIRE(observed);
  IFBM_REQUIRE(probabilities);
  IFBM_REQUIRE(out);
  return guarded([&] {
    fill_chi(ifbm::chi_square(observed->rep, std::span<const double>(probabilities, n), fitted_params),
             out);
  });
}

ifbm_status ifbm_chi_square_survival(double statistic, double dof, double* out) {
  IFBM_REQUIRE(out);
  return guarded([&] { *out = ifbm::chi_square_survival(statistic, dof); });
}

/* calibration */

void ifbm_fit_config_init(ifbm_fit_config* cfg) {
  if (!cfg) return;
  const ifbm::FitConfig d;
  cfg->k_min = d.k_grid.min;
  cfg->k_max = d.k_grid.max;
  cfg->k_step = d.k_grid.step;
  cfg->c_min = d.c_grid.min;
  cfg->c_max = d.c_grid.max;
  cfg->c_step = d.c_grid.step;
  cfg->mc_paths = d.mc_paths;
  cfg->mc_steps = d.mc_steps;
  cfg->seed = d.seed;
  cfg->refine = d.refine ? 1 : 0;
  cfg->threads = d.threads;
  cfg->sample_cap = d.sample_cap;
  cfg->drift_mode = IFBM_DRIFT_MU_SCALED;
}

ifbm_status ifbm_estimate_mu_sigma(const ifbm_sample* returns, double dt, double* mu,
                                   double* sigma) {
  IFBM_REQUIRE(returns);
  IFBM_REQUIRE(mu);
  IFBM_REQUIRE(sigma);
  return guarded([&] {
    const auto est = ifbm::estimate_mu_sigma(returns->rep, dt);
    *mu = est.mu;
    *sigma = est.sigma;
  });
}

ifbm_status ifbm_objective(double k, double c, const ifbm_histogram* empirical,
                           const ifbm_process* proc, const ifbm_fit_config* cfg,
                           ifbm_chi_square* out) {
  IFBM_REQUIRE(empirical);
  IFBM_REQUIRE(proc);
  IFBM_REQUIRE(cfg);
  IFBM_REQUIRE(out);
  return guarded([&] {
    fill_chi(ifbm::objective(k, c, empirical->rep, to_process(*proc), to_fit_config(*cfg)), out);
  });
}

ifbm_status ifbm_fit(const ifbm_sample* empirical, double dt, const ifbm_fit_config* cfg,
                     ifbm_fit_result** out) {
  IFBM_REQUIRE(empirical);
  IFBM_REQUIRE(cfg);
  IFBM_REQUIRE(out);
  *out = nullptr;
  std::vector<ifbm::SurfacePoint> failed;
  const ifbm_status status = guarded([&] {
    try {
      *out = new ifbm_fit_result{ifbm::fit(empirical->rep, dt, to_fit_config(*cfg)), {}};
    } catch (const ifbm::FitFailure& e) {
      failed = e.surface();
      throw;
    }
  });
  if (status == IFBM_ERROR_FIT_FAILURE) {
    *out = new (std::nothrow) ifbm_fit_result{std::nullopt, std::move(failed)};
  }
  return status;
}

void ifbm_fit_result_destroy(ifbm_fit_result* result) { delete result; }

int ifbm_fit_result_has_optimum(const ifbm_fit_result* result) {
  return result && result->rep.has_value() ? 1 : 0;
}

ifbm_status ifbm_fit_result_params(const ifbm_fit_result* result, double* k_hat, double* c_hat,
                                   double* mu_hat, double* sigma_hat) {
  IFBM_REQUIRE(result);
  if (!result->rep) return fail(IFBM_ERROR_FIT_FAILURE, "fit result has no optimum");
  if (k_hat) *k_hat = result->rep->k_hat;
  if (c_hat) *c_hat = result->rep->c_hat;
  if (mu_hat) *mu_hat = result->rep->mu_hat;
  if (sigma_hat) *sigma_hat = result->rep->sigma_hat;
  return IFBM_OK;
}

ifbm_status ifbm_fit_result_chi_square(const ifbm_fit_result* result, ifbm_chi_square* best,
                                       ifbm_chi_square* gbm) {
  IFBM_REQUIRE(result);
  if (!result->rep) return fail(IFBM_ERROR_FIT_FAILURE, "fit result has no optimum");
  if (best) fill_chi(result->rep->chi2, best);
  if (gbm) fill_chi(result->rep->gbm_chi2, gbm);
  return IFBM_OK;
}

static const std::vector<ifbm::SurfacePoint>& surface_of(const ifbm_fit_result* r) {
  return r->rep ? r->rep->surface : r->failed_surface;
}

size_t ifbm_fit_result_surface_size(const ifbm_fit_result* result) {
  return result ? surface_of(result).size() : 0;
}

ifbm_status ifbm_fit_result_surface_point(const ifbm_fit_result* result, size_t index, double* k,
                                          double* c, double* chi2) {
  IFBM_REQUIRE(result);
  const auto& surface = surface_of(result);
  if (index >= surface.size()) return fail(IFBM_ERROR_INVALID_ARGUMENT, "surface index out of range");
  const auto& p = surface[index];
  if (k) *k = p.k;
  if (c) *c = p.c;
  if (chi2) *chi2 = p.chi2 ? p.chi2->statistic : std::numeric_limits<double>::quiet_NaN();
  return IFBM_OK;
}

ifbm_status ifbm_fit_result_json(const ifbm_fit_result* result, const char* metadata_json,
                                 char** out) {
  IFBM_REQUIRE(result);
  IFBM_REQUIRE(out);
  return guarded([&] {
    ifbm::Json doc;
    if (result->rep) {
      doc = ifbm::fit_result_json(*result->rep);
    } else {
      doc["error"] = "fit failure: every candidate produced degenerate binning";
      doc["candidates"] = result->failed_surface.size();
    }
    *out = copy_string(ifbm::to_text(with_metadata(std::move(doc), metadata_json)));
  });
}

ifbm_status ifbm_fit_result_surface_csv(const ifbm_fit_result* result, char** out) {
  IFBM_REQUIRE(result);
  IFBM_REQUIRE(out);
  return guarded([&] { *out = copy_string(ifbm::fit_surface_csv(surface_of(result))); });
}

/* reports */

ifbm_status ifbm_analyze_json(double k, double c, const ifbm_process* proc,
                              const char* metadata_json, char** out) {
  IFBM_REQUIRE(proc);
  IFBM_REQUIRE(out);
  return guarded([&] {
    *out = copy_string(ifbm::to_text(with_metadata(ifbm::analysis_json({k, c}, to_process(*proc)),
                                                   metadata_json)));
  });
}

}  // extern "C"
