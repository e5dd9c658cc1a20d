#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "ifbm/ifbm.h"

namespace {

using Json = nlohmann::ordered_json;

// Raised for a non-OK status from the library; maps to exit code 1.
struct LibraryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised for usage problems detected after parsing; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(ifbm_status status) {
  if (status == IFBM_OK) return;
  std::string msg = ifbm_status_name(status);
  const std::string detail = ifbm_last_error();
  if (!detail.empty()) msg += ": " + detail;
  throw LibraryError(msg);
}

template <typename T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};

using CurvePtr = std::unique_ptr<ifbm_curve, Deleter<ifbm_curve, ifbm_curve_destroy>>;
using SurfacePtr = std::unique_ptr<ifbm_surface, Deleter<ifbm_surface, ifbm_surface_destroy>>;
using PathSetPtr = std::unique_ptr<ifbm_pathset, Deleter<ifbm_pathset, ifbm_pathset_destroy>>;
using SamplePtr = std::unique_ptr<ifbm_sample, Deleter<ifbm_sample, ifbm_sample_destroy>>;
using SeriesPtr =
    std::unique_ptr<ifbm_price_series, Deleter<ifbm_price_series, ifbm_price_series_destroy>>;
using FitPtr = std::unique_ptr<ifbm_fit_result, Deleter<ifbm_fit_result, ifbm_fit_result_destroy>>;

// Takes ownership of a malloc'd string from the library.
std::string take(char* text) {
  std::string out(text ? text : "");
  ifbm_string_free(text);
  return out;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LibraryError("input/output error: cannot open " + path + " for writing");
  out << text;
  if (!out) throw LibraryError("input/output error: failed writing " + path);
}

bool to_stdout(const std::string& path) { return path.empty() || path == "-"; }

ifbm_format parse_format(const std::string& name) {
  return name == "json" ? IFBM_FORMAT_JSON : IFBM_FORMAT_CSV;
}

ifbm_drift_mode parse_mode(const std::string& name) {
  return name == "alpha" ? IFBM_DRIFT_ALPHA_SCALED : IFBM_DRIFT_MU_SCALED;
}

uint32_t env_threads() {
  const char* raw = std::getenv("IFBM_THREADS");
  if (!raw || !*raw) return 0;
  char* end = nullptr;
  const unsigned long v = std::strtoul(raw, &end, 10);
  if (*end != '\0' || v > 4096) throw UsageError("IFBM_THREADS must be a non-negative integer");
  return static_cast<uint32_t>(v);
}

// Every option of the subcommand with its effective value, in declaration order.
Json flag_values(const CLI::App& sub) {
  Json flags = Json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help") continue;
    if (opt->get_type_size() == 0) {
      flags[name] = opt->as<bool>();
    } else if (opt->count() > 0) {
      flags[name] = opt->as<std::string>();
    } else if (!opt->get_default_str().empty()) {
      flags[name] = opt->get_default_str();
    } else {
      flags[name] = nullptr;
    }
  }
  return flags;
}

Json metadata(const CLI::App& sub, std::optional<uint64_t> seed) {
  Json meta;
  meta["tool"] = "ifbm";
  meta["version"] = ifbm_version();
  meta["subcommand"] = sub.get_name();
  meta["flags"] = flag_values(sub);
  if (seed) meta["seed"] = *seed;
  return meta;
}

std::string sidecar_path(const std::string& out, const char* suffix) { return out + suffix; }

struct FeedbackArgs {
  double k = 0.0;
  double c = 1.0;
  double zmin = -4.0;
  double zmax = 4.0;
  std::size_t points = 801;
  std::string out;
  std::string format = "csv";
};

void run_feedback(const CLI::App& sub, const FeedbackArgs& a) {
  const std::string meta = metadata(sub, std::nullopt).dump();
  ifbm_curve* raw = nullptr;
  check(ifbm_curve_create(a.k, a.c, a.zmin, a.zmax, a.points, &raw));
  CurvePtr curve(raw);
  char* critical = nullptr;
  check(ifbm_critical_points_json(a.k, a.c, nullptr, &critical));
  const Json critical_doc = Json::parse(take(critical));
  char* text = nullptr;
  check(ifbm_curve_serialize(curve.get(), parse_format(a.format), meta.c_str(), &text));
  write_output(a.out, take(text));
  if (!to_stdout(a.out)) {
    Json side;
    side["metadata"] = Json::parse(meta);
    side["critical_points"] = critical_doc;
    write_output(sidecar_path(a.out, ".meta.json"), side.dump(2) + "\n");
  }
}

struct SurfaceArgs {
  double k = 0.0;
  double c = 1.0;
  std::string zgrid = "-4:4:801";
  std::size_t tsteps = 50;
  std::string out;
  std::string format = "csv";
};

void parse_zgrid(const std::string& spec, double& zmin, double& zmax, std::size_t& points) {
  const auto first = spec.find(':');
  const auto second = spec.find(':', first == std::string::npos ? first : first + 1);
  if (first == std::string::npos || second == std::string::npos) {
    throw UsageError("--zgrid expects zmin:zmax:points");
  }
  try {
    std::size_t used = 0;
    const std::string a = spec.substr(0, first);
    const std::string b = spec.substr(first + 1, second - first - 1);
    const std::string c = spec.substr(second + 1);
    zmin = std::stod(a, &used);
    if (used != a.size()) throw std::invalid_argument(a);
    zmax = std::stod(b, &used);
    if (used != b.size()) throw std::invalid_argument(b);
    const long long n = std::stoll(c, &used);
    if (used != c.size() || n < 0) throw std::invalid_argument(c);
    points = static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw UsageError("--zgrid expects zmin:zmax:points");
  }
}

void run_surface(const CLI::App& sub, const SurfaceArgs& a) {
  double zmin = 0.0;
  double zmax = 0.0;
  std::size_t points = 0;
  parse_zgrid(a.zgrid, zmin, zmax, points);
  const std::string meta = metadata(sub, std::nullopt).dump();
  ifbm_surface* raw = nullptr;
  check(ifbm_surface_create(a.k, a.c, zmin, zmax, points, a.tsteps, &raw));
  SurfacePtr surface(raw);
  char* text = nullptr;
  check(ifbm_surface_serialize(surface.get(), parse_format(a.format), meta.c_str(), &text));
  write_output(a.out, take(text));
  if (!to_stdout(a.out) && a.format == "csv") {
    Json side;
    side["metadata"] = Json::parse(meta);
    write_output(sidecar_path(a.out, ".meta.json"), side.dump(2) + "\n");
  }
}

struct SimulateArgs {
  double mu = 0.0005;
  double sigma = 0.01;
  double dt = 1.0;
  double k = 0.0;
  double c = 1.0;
  uint64_t paths = 1;
  uint64_t steps = 1000;
  uint64_t seed = 0;
  std::string drift_mode = "mu";
  bool gbm = false;
  double initial_price = 100.0;
  std::size_t horizon = 1;
  std::string out;
  std::string pooled_out;
  std::string prices_out;
  std::string format = "csv";
};

void run_simulate(const CLI::App& sub, const SimulateArgs& a) {
  if (!a.prices_out.empty() && a.paths != 1) {
    throw UsageError("--prices-out requires --paths 1");
  }
  const std::string meta = metadata(sub, a.seed).dump();
  const ifbm_process proc{a.mu, a.sigma, a.dt, parse_mode(a.drift_mode)};
  ifbm_sim_config cfg;
  ifbm_sim_config_init(&cfg);
  cfg.n_paths = a.paths;
  cfg.n_steps = a.steps;
  cfg.master_seed = a.seed;
  cfg.initial_price = a.initial_price;
  cfg.threads = env_threads();
  cfg.materialize_prices = a.prices_out.empty() ? 0 : 1;

  ifbm_pathset* raw = nullptr;
  if (a.gbm) {
    check(ifbm_simulate_gbm(&proc, &cfg, &raw));
  } else {
    check(ifbm_simulate(&proc, a.k, a.c, &cfg, &raw));
  }
  PathSetPtr paths(raw);

  const ifbm_format fmt = parse_format(a.format);
  char* text = nullptr;
  check(ifbm_pathset_serialize(paths.get(), fmt, meta.c_str(), &text));
  write_output(a.out, take(text));

  if (!a.pooled_out.empty()) {
    ifbm_sample* pooled_raw = nullptr;
    check(ifbm_pool_returns(paths.get(), a.horizon, &pooled_raw));
    SamplePtr pooled(pooled_raw);
    char* pooled_text = nullptr;
    check(ifbm_sample_serialize(pooled.get(), fmt, meta.c_str(), &pooled_text));
    write_output(a.pooled_out, take(pooled_text));
  }
  if (!a.prices_out.empty()) {
    char* price_text = nullptr;
    check(ifbm_pathset_price_csv(paths.get(), 0, &price_text));
    write_output(a.prices_out, take(price_text));
  }
  if (!to_stdout(a.out) && fmt == IFBM_FORMAT_CSV) {
    char* prov = nullptr;
    check(ifbm_pathset_provenance_json(paths.get(), &prov));
    Json side;
    side["metadata"] = Json::parse(meta);
    side["provenance"] = Json::parse(take(prov));
    write_output(sidecar_path(a.out, ".meta.json"), side.dump(2) + "\n");
  }
}

struct StatsArgs {
  std::string input;
  std::string out;
};

void run_stats(const CLI::App& sub, const StatsArgs& a) {
  const std::string meta = metadata(sub, std::nullopt).dump();
  ifbm_sample* raw = nullptr;
  check(ifbm_sample_load(a.input.c_str(), &raw));
  SamplePtr sample(raw);
  ifbm_moments m;
  check(ifbm_sample_moments(sample.get(), &m));
  char* text = nullptr;
  check(ifbm_moments_json(&m, meta.c_str(), &text));
  write_output(a.out, take(text));
}

struct FitArgs {
  std::string prices;
  std::string column = "close";
  std::string time_column;
  double dt = 1.0;
  double kmin = -12.0;
  double kmax = 2.0;
  double kstep = 0.5;
  double cmin = 0.25;
  double cmax = 4.0;
  double cstep = 0.25;
  uint64_t paths = 100;
  uint64_t steps = 1000;
  uint64_t seed = 0;
  bool refine = true;
  std::string drift_mode = "mu";
  std::string out;
};

void run_fit(const CLI::App& sub, const FitArgs& a) {
  const std::string meta = metadata(sub, a.seed).dump();
  ifbm_price_series* series_raw = nullptr;
  check(ifbm_price_series_load_csv(a.prices.c_str(), a.column.c_str(),
                                   a.time_column.empty() ? nullptr : a.time_column.c_str(),
                                   &series_raw));
  SeriesPtr series(series_raw);
  ifbm_sample* returns_raw = nullptr;
  check(ifbm_log_returns(series.get(), &returns_raw));
  SamplePtr returns(returns_raw);

  ifbm_fit_config cfg;
  ifbm_fit_config_init(&cfg);
  cfg.k_min = a.kmin;
  cfg.k_max = a.kmax;
  cfg.k_step = a.kstep;
  cfg.c_min = a.cmin;
  cfg.c_max = a.cmax;
  cfg.c_step = a.cstep;
  cfg.mc_paths = a.paths;
  cfg.mc_steps = a.steps;
  cfg.seed = a.seed;
  cfg.refine = a.refine ? 1 : 0;
  cfg.threads = env_threads();
  cfg.drift_mode = parse_mode(a.drift_mode);

  ifbm_fit_result* raw = nullptr;
  const ifbm_status status = ifbm_fit(returns.get(), a.dt, &cfg, &raw);
  if (status != IFBM_OK && status != IFBM_ERROR_FIT_FAILURE) check(status);
  const std::string failure = status == IFBM_OK ? "" : ifbm_last_error();
  FitPtr result(raw);
  if (!result) check(status);

  char* text = nullptr;
  check(ifbm_fit_result_json(result.get(), meta.c_str(), &text));
  write_output(a.out, take(text));
  if (!to_stdout(a.out)) {
    char* csv = nullptr;
    check(ifbm_fit_result_surface_csv(result.get(), &csv));
    write_output(sidecar_path(a.out, ".surface.csv"), take(csv));
  }
  if (status != IFBM_OK) throw LibraryError(std::string(ifbm_status_name(status)) + ": " + failure);
}

struct AnalyzeArgs {
  double k = 0.0;
  double c = 1.0;
  double mu = 0.01;
  double sigma = 0.05;
  double dt = 1.0;
  std::string drift_mode = "mu";
  std::string out;
};

void run_analyze(const CLI::App& sub, const AnalyzeArgs& a) {
  const std::string meta = metadata(sub, std::nullopt).dump();
  const ifbm_process proc{a.mu, a.sigma, a.dt, parse_mode(a.drift_mode)};
  char* text = nullptr;
  check(ifbm_analyze_json(a.k, a.c, &proc, meta.c_str(), &text));
  write_output(a.out, take(text));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Information feedback Brownian motion toolkit"};
  app.set_version_flag("--version", std::string(ifbm_version()));
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  const auto formats = CLI::IsMember({"csv", "json"});
  const auto modes = CLI::IsMember({"mu", "alpha"});

  FeedbackArgs fa;
  auto* feedback = app.add_subcommand("feedback", "Emit the feedback curve K*f_c(z) on a z grid");
  feedback->add_option("--k", fa.k, "Feedback weight K")->required();
  feedback->add_option("--c", fa.c, "Envelope width c > 0");
  feedback->add_option("--zmin", fa.zmin, "Lower end of the z grid");
  feedback->add_option("--zmax", fa.zmax, "Upper end of the z grid");
  feedback->add_option("--points", fa.points, "Number of grid points");
  feedback->add_option("--out", fa.out, "Output file (default stdout)");
  feedback->add_option("--format", fa.format, "csv or json")->check(formats);

  SurfaceArgs sa;
  auto* surface = app.add_subcommand("surface", "Emit the feedback surface over (t, z)");
  surface->add_option("--k", sa.k, "Feedback weight K")->required();
  surface->add_option("--c", sa.c, "Envelope width c > 0");
  surface->add_option("--zgrid", sa.zgrid, "zmin:zmax:points");
  surface->add_option("--tsteps", sa.tsteps, "Number of time slices");
  surface->add_option("--out", sa.out, "Output file (default stdout)");
  surface->add_option("--format", sa.format, "csv or json")->check(formats);

  SimulateArgs ma;
  auto* simulate = app.add_subcommand("simulate", "Simulate log-return paths");
  simulate->add_option("--mu", ma.mu, "Drift per unit time");
  simulate->add_option("--sigma", ma.sigma, "Volatility per unit time");
  simulate->add_option("--dt", ma.dt, "Time step");
  simulate->add_option("--k", ma.k, "Feedback weight K");
  simulate->add_option("--c", ma.c, "Envelope width c > 0");
  simulate->add_option("--paths", ma.paths, "Number of paths")->check(CLI::PositiveNumber);
  simulate->add_option("--steps", ma.steps, "Steps per path")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", ma.seed, "Master seed");
  simulate->add_option("--drift-mode", ma.drift_mode, "mu or alpha")->check(modes);
  simulate->add_flag("--gbm", ma.gbm, "Plain geometric Brownian motion (ignores K and c)");
  simulate->add_option("--initial-price", ma.initial_price, "Starting price for --prices-out");
  simulate->add_option("--horizon", ma.horizon, "Aggregation horizon for --pooled-out")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--out", ma.out, "Path-set output file (default stdout)");
  simulate->add_option("--pooled-out", ma.pooled_out, "Pooled returns output file");
  simulate->add_option("--prices-out", ma.prices_out, "Price path CSV (single path only)");
  simulate->add_option("--format", ma.format, "csv or json")->check(formats);

  StatsArgs ta;
  auto* stats = app.add_subcommand("stats", "Sample moments of a returns file");
  stats->add_option("--input", ta.input, "Returns file, one value per line")->required();
  stats->add_option("--out", ta.out, "Output file (default stdout)");

  FitArgs ia;
  auto* fit = app.add_subcommand("fit", "Calibrate K and c to a price series");
  fit->add_option("--prices", ia.prices, "Price CSV")->required();
  fit->add_option("--column", ia.column, "Price column name or zero-based index");
  fit->add_option("--time-column", ia.time_column, "Timestamp column name or index");
  fit->add_option("--dt", ia.dt, "Time step between observations");
  fit->add_option("--kmin", ia.kmin, "K grid start");
  fit->add_option("--kmax", ia.kmax, "K grid end");
  fit->add_option("--kstep", ia.kstep, "K grid step");
  fit->add_option("--cmin", ia.cmin, "c grid start");
  fit->add_option("--cmax", ia.cmax, "c grid end");
  fit->add_option("--cstep", ia.cstep, "c grid step");
  fit->add_option("--paths", ia.paths, "Simulated paths per candidate")->check(CLI::PositiveNumber);
  fit->add_option("--steps", ia.steps, "Simulated steps per path")->check(CLI::PositiveNumber);
  fit->add_option("--seed", ia.seed, "Master seed");
  fit->add_flag("--refine,!--no-refine", ia.refine, "Local refinement around the grid optimum");
  fit->add_option("--drift-mode", ia.drift_mode, "mu or alpha")->check(modes);
  fit->add_option("--out", ia.out, "Result JSON (surface CSV goes to <out>.surface.csv)");

  AnalyzeArgs na;
  auto* analyze = app.add_subcommand("analyze", "Critical points, regions and exact step moments");
  analyze->add_option("--k", na.k, "Feedback weight K")->required();
  analyze->add_option("--c", na.c, "Envelope width c > 0");
  analyze->add_option("--mu", na.mu, "Drift per unit time");
  analyze->add_option("--sigma", na.sigma, "Volatility per unit time");
  analyze->add_option("--dt", na.dt, "Time step");
  analyze->add_option("--drift-mode", na.drift_mode, "mu or alpha")->check(modes);
  analyze->add_option("--out", na.out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*feedback) run_feedback(*feedback, fa);
    else if (*surface) run_surface(*surface, sa);
    else if (*simulate) run_simulate(*simulate, ma);
    else if (*stats) run_stats(*stats, ta);
    else if (*fit) run_fit(*fit, ia);
    else if (*analyze) run_analyze(*analyze, na);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const LibraryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
