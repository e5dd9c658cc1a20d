#include "ifbm/serialize.hpp"

#include <charconv>
#include <limits>
#include <cmath>
#include <sstream>

#include "ifbm/error.hpp"

namespace ifbm {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Json parse_metadata(std::string_view metadata_json) {
  if (metadata_json.empty()) return Json::object();
  Json doc = Json::parse(metadata_json.begin(), metadata_json.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw_domain("metadata must be a JSON object");
  return doc;
}

std::string to_text(const Json& doc) { return doc.dump(2) + "\n"; }

std::string_view to_string(DriftMode mode) {
  return mode == DriftMode::MuScaled ? "mu" : "alpha";
}

namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json optional_number(const std::optional<double>& v) {
  return v ? number_or_null(*v) : Json(nullptr);
}

}  // namespace

Json to_json(const FeedbackParams& params) { return Json{{"k", params.k}, {"c", params.c}}; }

Json to_json(const CriticalPoints& cp, const FeedbackParams& params) {
  Json out;
  out["roots"] = Json::array({-cp.z_root_pos, 0.0, cp.z_root_pos});
  out["stationary_points"] = Json::array({-cp.z_stat_pos, cp.z_stat_pos});
  out["z_root_pos"] = cp.z_root_pos;
  out["z_stat_pos"] = cp.z_stat_pos;
  // Extremum values of K f_c at -z_stat and +z_stat.
  out["extrema"] = Json::array({eval_feedback(-cp.z_stat_pos, params),
                                eval_feedback(cp.z_stat_pos, params)});
  return out;
}

Json to_json(const ProcessParams& proc) {
  return Json{{"mu", proc.mu()},
              {"sigma", proc.sigma()},
              {"dt", proc.dt()},
              {"alpha", proc.alpha()},
              {"drift_mode", std::string(to_string(proc.drift_mode()))}};
}

Json to_json(const SimConfig& cfg) {
  return Json{{"n_paths", cfg.n_paths},
              {"n_steps", cfg.n_steps},
              {"master_seed", cfg.master_seed},
              {"initial_price", cfg.initial_price}};
}

Json to_json(const MomentSet& m) {
  Json out;
  out["mean"] = number_or_null(m.mean);
  out["variance"] = number_or_null(m.variance);
  out["skewness"] = optional_number(m.skewness);
  out["excess_kurtosis"] = optional_number(m.excess_kurtosis);
  out["shape_defined"] = m.skewness.has_value();
  if (m.n) {
    out["n"] = *m.n;
  } else {
    out["n"] = "exact";
  }
  return out;
}

Json to_json(const ChiSquareResult& r) {
  return Json{{"statistic", r.statistic},
              {"dof", r.dof},
              {"effective_bins", r.effective_bins},
              {"merged_bins", r.merged_bins},
              {"p_value", r.p_value}};
}

Json to_json(const Histogram& h) {
  Json out;
  out["edges"] = h.edges;
  out["counts"] = h.counts;
  out["total"] = h.total;
  out["underflow"] = h.underflow;
  out["overflow"] = h.overflow;
  return out;
}

std::string curve_csv(const Curve& curve) {
  std::string out = "z,value\n";
  for (std::size_t i = 0; i < curve.z.size(); ++i) {
    out += format_double(curve.z[i]);
    out += ',';
    out += format_double(curve.value[i]);
    out += '\n';
  }
  return out;
}

Json critical_points_json(const FeedbackParams& params) {
  params.validate();
  const auto cp = critical_points(params.c);
  Json out;
  out["params"] = to_json(params);
  out["critical_points"] = to_json(cp, params);

  Json partition;
  if (params.k == 0.0) {
    partition["zero"] = "all z";
  } else {
    const std::string inner = params.k < 0.0 ? "negative" : "positive";
    const std::string outer = params.k < 0.0 ? "positive" : "negative";
    partition["inner"] = Json{{"interval", Json::array({-cp.z_root_pos, cp.z_root_pos})},
                              {"excluding", Json::array({0.0})},
                              {"sign", inner}};
    partition["outer"] = Json{{"interval", "|z| > z_root"}, {"sign", outer}};
    partition["zero"] = Json::array({-cp.z_root_pos, 0.0, cp.z_root_pos});
  }
  out["feedback_sign_partition"] = partition;

  if (params.k < 0.0) {
    const double r = cp.z_root_pos, s = cp.z_stat_pos;
    const double inf = std::numeric_limits<double>::infinity();
    auto region = [&](Region label, double lo, double hi) {
      return Json{{"region", std::string(to_string(label))},
                  {"lower", number_or_null(lo)},
                  {"upper", number_or_null(hi)},
                  {"feedback", is_negative_feedback_region(label) ? "negative" : "positive"}};
    };
    out["regions"] = Json::array({region(Region::Region1, 0.0, s), region(Region::Region2, s, r),
                                  region(Region::Region3, r, inf), region(Region::Region4, -s, 0.0),
                                  region(Region::Region5, -r, -s), region(Region::Region6, -inf, -r)});
    out["region_boundaries"] = Json::array({-r, -s, 0.0, s, r});
  } else {
    out["regions"] = nullptr;
    out["regions_notice"] =
        "region taxonomy is defined for K < 0 only; regions omitted for K >= 0";
  }
  return out;
}

Json curve_json(const Curve& curve) {
  Json out;
  out["params"] = to_json(curve.params);
  out["z"] = curve.z;
  out["value"] = curve.value;
  if (!curve.regions.empty()) {
    Json labels = Json::array();
    for (auto r : curve.regions) labels.push_back(std::string(to_string(r)));
    out["region"] = std::move(labels);
  }
  out["critical_points"] = to_json(curve.critical, curve.params);
  return out;
}

std::string surface_csv(const Surface& surface) {
  std::string out = "t,z,value\n";
  for (std::size_t t = 0; t < surface.t_steps; ++t) {
    const auto slice = surface.slice(t);
    const std::string t_text = std::to_string(t);
    for (std::size_t i = 0; i < surface.z.size(); ++i) {
      out += t_text;
      out += ',';
      out += format_double(surface.z[i]);
      out += ',';
      out += format_double(slice[i]);
      out += '\n';
    }
  }
  return out;
}

Json surface_json(const Surface& surface) {
  Json out;
  out["params"] = to_json(surface.params);
  out["z"] = surface.z;
  Json t = Json::array();
  for (std::size_t i = 0; i < surface.t_steps; ++i) t.push_back(i);
  out["t"] = std::move(t);
  Json values = Json::array();
  for (std::size_t i = 0; i < surface.t_steps; ++i) {
    const auto s = surface.slice(i);
    values.push_back(std::vector<double>(s.begin(), s.end()));
  }
  out["value"] = std::move(values);
  return out;
}

Json provenance_json(const PathSet& paths) {
  Json out;
  out["process"] = to_json(paths.process());
  if (paths.has_feedback_term()) {
    out["feedback"] = to_json(paths.feedback());
  } else {
    out["feedback"] = nullptr;
    out["model"] = "gbm";
  }
  out["config"] = to_json(paths.config());
  return out;
}

std::string pathset_csv(const PathSet& paths) {
  std::string out = "path";
  for (std::uint64_t t = 0; t < paths.n_steps(); ++t) out += ",r" + std::to_string(t);
  out += '\n';
  for (std::uint64_t p = 0; p < paths.n_paths(); ++p) {
    out += std::to_string(p);
    for (double r : paths.row(p)) {
      out += ',';
      out += format_double(r);
    }
    out += '\n';
  }
  return out;
}

Json pathset_json(const PathSet& paths) {
  Json out;
  out["provenance"] = provenance_json(paths);
  Json rows = Json::array();
  for (std::uint64_t p = 0; p < paths.n_paths(); ++p) {
    const auto r = paths.row(p);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  out["log_returns"] = std::move(rows);
  if (paths.has_prices()) {
    Json prices = Json::array();
    for (std::uint64_t p = 0; p < paths.n_paths(); ++p) {
      std::vector<double> row(paths.n_steps() + 1);
      for (std::uint64_t t = 0; t <= paths.n_steps(); ++t) row[t] = paths.price(p, t);
      prices.push_back(std::move(row));
    }
    out["prices"] = std::move(prices);
  }
  return out;
}

std::string price_csv(const PathSet& paths, std::uint64_t path) {
  if (!paths.has_prices()) throw_domain("price levels were not materialized");
  if (path >= paths.n_paths()) throw_domain("path index out of range");
  std::string out = "t,price\n";
  for (std::uint64_t t = 0; t <= paths.n_steps(); ++t) {
    out += std::to_string(t);
    out += ',';
    out += format_double(paths.price(path, t));
    out += '\n';
  }
  return out;
}

std::string sample_csv(const ReturnsSample& sample) {
  std::string out;
  for (double v : sample.values()) {
    out += format_double(v);
    out += '\n';
  }
  return out;
}

Json sample_json(const ReturnsSample& sample) {
  Json out;
  out["source"] = sample.source() == SampleSource::Simulated ? "simulated" : "empirical";
  out["count"] = sample.size();
  out["values"] = std::vector<double>(sample.values().begin(), sample.values().end());
  return out;
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "edge_low,edge_high,count\n";
  for (std::size_t i = 0; i < h.bins(); ++i) {
    out += format_double(h.edges[i]);
    out += ',';
    out += format_double(h.edges[i + 1]);
    out += ',';
    out += std::to_string(h.counts[i]);
    out += '\n';
  }
  return out;
}

Json fit_result_json(const FitResult& r) {
  Json out;
  out["k_hat"] = r.k_hat;
  out["c_hat"] = r.c_hat;
  out["refined"] = r.refined;
  out["chi2"] = to_json(r.chi2);
  out["gbm_chi2"] = to_json(r.gbm_chi2);
  out["grid_chi2"] = to_json(r.grid_chi2);
  out["improvement_over_gbm"] = r.improvement_over_gbm();
  out["grid_improvement_over_gbm"] = r.grid_improvement_over_gbm();
  out["flat_threshold"] = r.flat_threshold();
  out["flat_near_gbm"] = r.flat_near_gbm();
  out["mu_hat"] = r.mu_hat;
  out["sigma_hat"] = r.sigma_hat;
  out["dt"] = r.dt;
  out["n_empirical"] = r.n_empirical;
  out["fitted_params"] = 2;
  out["dof_note"] =
      "dof subtracts the 2 fitted parameters (K, c) only; mu and sigma are "
      "estimated from the same data and not subtracted";
  const auto& cfg = r.config;
  out["seed"] = cfg.seed;
  out["grids"] = Json{{"k", Json{{"min", cfg.k_grid.min}, {"max", cfg.k_grid.max}, {"step", cfg.k_grid.step}}},
                      {"c", Json{{"min", cfg.c_grid.min}, {"max", cfg.c_grid.max}, {"step", cfg.c_grid.step}}}};
  out["mc_paths"] = cfg.mc_paths;
  out["mc_steps"] = cfg.mc_steps;
  out["drift_mode"] = std::string(to_string(cfg.drift_mode));
  out["empirical_bins"] = r.empirical.bins();
  return out;
}

std::string fit_surface_csv(std::span<const SurfacePoint> surface) {
  std::string out = "k,c,chi2,dof,p_value\n";
  for (const auto& p : surface) {
    out += format_double(p.k);
    out += ',';
    out += format_double(p.c);
    if (p.chi2) {
      out += ',' + format_double(p.chi2->statistic) + ',' + std::to_string(p.chi2->dof) + ',' +
             format_double(p.chi2->p_value);
    } else {
      out += ",nan,0,nan";
    }
    out += '\n';
  }
  return out;
}

Json analysis_json(const FeedbackParams& fb, const ProcessParams& proc) {
  Json out = critical_points_json(fb);
  out["process"] = to_json(proc);
  out["exact_step_moments"] = to_json(exact_step_moments(proc, fb));
  const MomentSet gbm = exact_step_moments(proc, FeedbackParams{0.0, fb.c});
  out["gbm_step_moments"] = to_json(gbm);
  if (proc.sigma() > 0.0) {
    const double scale = proc.sigma() * std::sqrt(proc.dt());
    Json shape;
    shape["central_half_width"] = 0.5 * scale;
    shape["central_mass"] = central_mass(proc, fb, 0.5 * scale);
    shape["central_mass_gbm"] = central_mass(proc, FeedbackParams{0.0, fb.c}, 0.5 * scale);
    shape["tail_threshold"] = 3.0 * scale;
    shape["tail_mass"] = tail_mass(proc, fb, 3.0 * scale);
    shape["tail_mass_gbm"] = tail_mass(proc, FeedbackParams{0.0, fb.c}, 3.0 * scale);
    out["peaking_flattening"] = std::move(shape);
  }
  return out;
}

}  // namespace ifbm
