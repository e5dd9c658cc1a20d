#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "ifbm/ifbm.h"

namespace {

std::string take(char* text) {
  std::string s(text ? text : "");
  ifbm_string_free(text);
  return s;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(ifbm_version()) == "0.3.0");
  CHECK(std::string(ifbm_status_name(IFBM_OK)) == "ok");
  CHECK(std::string(ifbm_status_name(IFBM_ERROR_DEGENERATE_BINNING)) == "degenerate binning");
}

TEST_CASE("feedback functions and error mapping") {
  double v = 0.0;
  REQUIRE(ifbm_eval_f(10.0, 1.0, &v) == IFBM_OK);
  CHECK(v == doctest::Approx(-1.4711276743037346).epsilon(1e-14));
  REQUIRE(ifbm_find_root(1.0, &v) == IFBM_OK);
  CHECK(v == doctest::Approx(1.1774100225154747).epsilon(1e-15));
  REQUIRE(ifbm_find_stationary(1.0, &v) == IFBM_OK);
  CHECK(std::abs(v - 0.58051861080079629) < 1e-10);

  CHECK(ifbm_eval_f(1.0, -1.0, &v) == IFBM_ERROR_DOMAIN);
  CHECK(std::string(ifbm_last_error()).find("c > 0") != std::string::npos);
  CHECK(ifbm_eval_f(1.0, 1.0, nullptr) == IFBM_ERROR_INVALID_ARGUMENT);

  ifbm_region region;
  REQUIRE(ifbm_classify_region(-0.9, -5.0, 1.0, &region) == IFBM_OK);
  CHECK(region == IFBM_REGION_5);
  CHECK(ifbm_classify_region(0.3, 5.0, 1.0, &region) == IFBM_ERROR_UNSUPPORTED);
  ifbm_sign sign;
  REQUIRE(ifbm_feedback_sign(0.5, -5.0, 1.0, &sign) == IFBM_OK);
  CHECK(sign == IFBM_SIGN_NEGATIVE);

  char* json = nullptr;
  REQUIRE(ifbm_critical_points_json(-5.0, 1.0, "{\"run\": 1}", &json) == IFBM_OK);
  const auto text = take(json);
  CHECK(text.find("\"metadata\"") != std::string::npos);
  CHECK(text.find("region_boundaries") != std::string::npos);
  CHECK(ifbm_critical_points_json(-5.0, 1.0, "not json", &json) == IFBM_ERROR_DOMAIN);
}

TEST_CASE("curves and surfaces") {
  ifbm_curve* curve = nullptr;
  REQUIRE(ifbm_curve_create(-5.0, 1.0, -4.0, 4.0, 801, &curve) == IFBM_OK);
  CHECK(ifbm_curve_size(curve) == 801);
  ifbm_surface* surface = nullptr;
  REQUIRE(ifbm_surface_create(-5.0, 1.0, -4.0, 4.0, 801, 4, &surface) == IFBM_OK);
  CHECK(ifbm_surface_time_steps(surface) == 4);
  for (size_t i = 0; i < 801; i += 50) {
    double z, a, b;
    REQUIRE(ifbm_curve_point(curve, i, &z, &a) == IFBM_OK);
    REQUIRE(ifbm_surface_value(surface, 3, i, &b) == IFBM_OK);
    CHECK(a == b);
  }
  double z, val;
  CHECK(ifbm_curve_point(curve, 801, &z, &val) == IFBM_ERROR_INVALID_ARGUMENT);
  char* csv = nullptr;
  REQUIRE(ifbm_curve_serialize(curve, IFBM_FORMAT_CSV, nullptr, &csv) == IFBM_OK);
  CHECK(take(csv).rfind("z,value\n", 0) == 0);
  char* js = nullptr;
  REQUIRE(ifbm_surface_serialize(surface, IFBM_FORMAT_JSON, "{\"a\":1}", &js) == IFBM_OK);
  CHECK(take(js).find("\"metadata\"") != std::string::npos);
  ifbm_curve_destroy(curve);
  ifbm_surface_destroy(surface);
  ifbm_curve_destroy(nullptr);

  CHECK(ifbm_curve_create(-5.0, 1.0, 4.0, -4.0, 10, &curve) == IFBM_ERROR_DOMAIN);
}

TEST_CASE("simulation through handles") {
  const ifbm_process proc{0.01, 0.05, 1.0, IFBM_DRIFT_MU_SCALED};
  ifbm_sim_config cfg;
  ifbm_sim_config_init(&cfg);
  CHECK(cfg.n_paths == 1);
  CHECK(cfg.initial_price == 100.0);
  cfg.n_paths = 5;
  cfg.n_steps = 20;
  cfg.master_seed = 9;
  cfg.materialize_prices = 1;

  ifbm_pathset* a = nullptr;
  ifbm_pathset* b = nullptr;
  REQUIRE(ifbm_simulate(&proc, 0.0, 1.0, &cfg, &a) == IFBM_OK);
  REQUIRE(ifbm_simulate_gbm(&proc, &cfg, &b) == IFBM_OK);
  CHECK(ifbm_pathset_paths(a) == 5);
  CHECK(ifbm_pathset_steps(a) == 20);
  CHECK(std::memcmp(ifbm_pathset_log_returns(a), ifbm_pathset_log_returns(b),
                    100 * sizeof(double)) == 0);
  CHECK(ifbm_pathset_prices(a)[0] == 100.0);

  std::vector<double> z(3);
  REQUIRE(ifbm_normal_stream(9, 0, 0, z.data(), z.size()) == IFBM_OK);
  double r = 0.0;
  REQUIRE(ifbm_step_log_return(z[0], &proc, 0.0, 1.0, &r) == IFBM_OK);
  CHECK(r == ifbm_pathset_log_returns(a)[0]);

  ifbm_sample* pooled = nullptr;
  REQUIRE(ifbm_pool_returns(a, 1, &pooled) == IFBM_OK);
  CHECK(ifbm_sample_size(pooled) == 100);
  ifbm_moments m;
  REQUIRE(ifbm_sample_moments(pooled, &m) == IFBM_OK);
  CHECK(m.exact == 0);
  CHECK(m.n == 100);
  CHECK(m.shape_defined == 1);

  char* prov = nullptr;
  REQUIRE(ifbm_pathset_provenance_json(b, &prov) == IFBM_OK);
  CHECK(take(prov).find("gbm") != std::string::npos);
  char* prices = nullptr;
  REQUIRE(ifbm_pathset_price_csv(a, 4, &prices) == IFBM_OK);
  ifbm_string_free(prices);
  CHECK(ifbm_pathset_price_csv(a, 5, &prices) == IFBM_ERROR_DOMAIN);

  cfg.sample_cap = 10;
  ifbm_pathset* c = nullptr;
  CHECK(ifbm_simulate(&proc, 0.0, 1.0, &cfg, &c) == IFBM_ERROR_RESOURCE);
  CHECK(c == nullptr);
  const ifbm_process bad{0.01, -1.0, 1.0, IFBM_DRIFT_MU_SCALED};
  CHECK(ifbm_simulate(&bad, 0.0, 1.0, &cfg, &c) == IFBM_ERROR_DOMAIN);

  ifbm_sample_destroy(pooled);
  ifbm_pathset_destroy(a);
  ifbm_pathset_destroy(b);
}

TEST_CASE("analytics through handles") {
  const ifbm_process proc{0.01, 0.05, 1.0, IFBM_DRIFT_MU_SCALED};
  ifbm_moments m;
  REQUIRE(ifbm_exact_step_moments(&proc, -5.0, 1.0, &m) == IFBM_OK);
  CHECK(m.exact == 1);
  CHECK(m.excess_kurtosis == doctest::Approx(2.25279779498431).epsilon(1e-8));
  char* mj = nullptr;
  REQUIRE(ifbm_moments_json(&m, nullptr, &mj) == IFBM_OK);
  CHECK(take(mj).find("\"exact\"") != std::string::npos);

  double central = 0.0;
  double tail = 0.0;
  REQUIRE(ifbm_central_mass(&proc, -5.0, 1.0, 0.025, &central) == IFBM_OK);
  REQUIRE(ifbm_tail_mass(&proc, -5.0, 1.0, 0.15, &tail) == IFBM_OK);
  CHECK(std::abs(central - 0.578271) < 3e-6);
  CHECK(tail == doctest::Approx(3.458e-2).epsilon(2e-3));

  std::vector<double> values;
  for (int i = 0; i < 10; ++i) {
    values.push_back(0.05 + 0.04 * i);
    values.push_back(0.55 + 0.04 * i);
  }
  values.push_back(1.5);
  ifbm_sample* s = nullptr;
  REQUIRE(ifbm_sample_create(values.data(), values.size(), IFBM_SOURCE_EMPIRICAL, &s) == IFBM_OK);
  ifbm_histogram* h = nullptr;
  REQUIRE(ifbm_histogram_build_uniform(s, 0.0, 1.0, 2, &h) == IFBM_OK);
  CHECK(ifbm_histogram_bins(h) == 2);
  CHECK(ifbm_histogram_counts(h)[0] == 10);
  uint64_t total, under, over;
  REQUIRE(ifbm_histogram_tallies(h, &total, &under, &over) == IFBM_OK);
  CHECK(total == 21);
  CHECK(under == 0);
  CHECK(over == 1);
  ifbm_chi_square chi;
  REQUIRE(ifbm_chi_square_histograms(h, h, 0, &chi) == IFBM_OK);
  CHECK(chi.statistic == 0.0);
  const double probs[] = {0.5, 0.5};
  REQUIRE(ifbm_chi_square_probabilities(h, probs, 2, 0, &chi) == IFBM_OK);
  CHECK(chi.dof == 1);
  CHECK(ifbm_chi_square_probabilities(h, probs, 2, 1, &chi) == IFBM_ERROR_DEGENERATE_BINNING);
  double q = 0.0;
  REQUIRE(ifbm_chi_square_survival(3.84, 1, &q) == IFBM_OK);
  CHECK(q == doctest::Approx(0.05004352124870519).epsilon(1e-10));

  const double inf_value[] = {INFINITY};
  ifbm_sample* bad = nullptr;
  CHECK(ifbm_sample_create(inf_value, 1, IFBM_SOURCE_EMPIRICAL, &bad) == IFBM_ERROR_DOMAIN);

  ifbm_histogram_destroy(h);
  ifbm_sample_destroy(s);
}

TEST_CASE("fit through handles") {
  const ifbm_process proc{0.01, 0.05, 1.0, IFBM_DRIFT_MU_SCALED};
  ifbm_sim_config sim;
  ifbm_sim_config_init(&sim);
  sim.n_steps = 5000;
  sim.master_seed = 21;
  ifbm_pathset* ps = nullptr;
  REQUIRE(ifbm_simulate(&proc, -5.0, 1.0, &sim, &ps) == IFBM_OK);
  ifbm_sample* data = nullptr;
  REQUIRE(ifbm_pool_returns(ps, 1, &data) == IFBM_OK);

  ifbm_fit_config cfg;
  ifbm_fit_config_init(&cfg);
  CHECK(cfg.k_min == -12.0);
  CHECK(cfg.c_step == 0.25);
  cfg.k_min = -8.0;
  cfg.k_max = 0.0;
  cfg.k_step = 2.0;
  cfg.c_min = 0.5;
  cfg.c_max = 1.5;
  cfg.c_step = 0.5;
  cfg.mc_paths = 10;
  cfg.refine = 0;

  ifbm_fit_result* fit = nullptr;
  REQUIRE(ifbm_fit(data, 1.0, &cfg, &fit) == IFBM_OK);
  CHECK(ifbm_fit_result_has_optimum(fit) == 1);
  CHECK(ifbm_fit_result_surface_size(fit) == 15);
  double k, c, mu, sigma;
  REQUIRE(ifbm_fit_result_params(fit, &k, &c, &mu, &sigma) == IFBM_OK);
  ifbm_chi_square best, gbm;
  REQUIRE(ifbm_fit_result_chi_square(fit, &best, &gbm) == IFBM_OK);
  CHECK(best.statistic <= gbm.statistic);
  char* json = nullptr;
  REQUIRE(ifbm_fit_result_json(fit, "{\"seed\": 0}", &json) == IFBM_OK);
  CHECK(take(json).find("k_hat") != std::string::npos);
  char* csv = nullptr;
  REQUIRE(ifbm_fit_result_surface_csv(fit, &csv) == IFBM_OK);
  CHECK(take(csv).rfind("k,c,chi2,dof,p_value\n", 0) == 0);
  ifbm_fit_result_destroy(fit);

  double emu = 0.0;
  double esig = 0.0;
  REQUIRE(ifbm_estimate_mu_sigma(data, 1.0, &emu, &esig) == IFBM_OK);
  CHECK(emu == mu);
  CHECK(esig == sigma);

  cfg.c_min = -1.0;
  CHECK(ifbm_fit(data, 1.0, &cfg, &fit) == IFBM_ERROR_DOMAIN);
  CHECK(fit == nullptr);

  ifbm_sample_destroy(data);
  ifbm_pathset_destroy(ps);
}

TEST_CASE("fit failure still reports the surface") {
  // A constant series bins into a single cell, so every candidate is degenerate.
  const std::vector<double> values(200, 0.001);
  ifbm_sample* data = nullptr;
  REQUIRE(ifbm_sample_create(values.data(), values.size(), IFBM_SOURCE_EMPIRICAL, &data) ==
          IFBM_OK);
  ifbm_fit_config cfg;
  ifbm_fit_config_init(&cfg);
  cfg.k_min = -1.0;
  cfg.k_max = 0.0;
  cfg.k_step = 1.0;
  cfg.c_min = 1.0;
  cfg.c_max = 1.0;
  cfg.mc_paths = 1;
  cfg.mc_steps = 200;
  ifbm_fit_result* fit = nullptr;
  REQUIRE(ifbm_fit(data, 1.0, &cfg, &fit) == IFBM_ERROR_FIT_FAILURE);
  REQUIRE(fit != nullptr);
  CHECK(ifbm_fit_result_has_optimum(fit) == 0);
  CHECK(ifbm_fit_result_surface_size(fit) == 2);
  double k, c, chi2;
  REQUIRE(ifbm_fit_result_surface_point(fit, 1, &k, &c, &chi2) == IFBM_OK);
  CHECK(k == 0.0);
  CHECK(std::isnan(chi2));
  CHECK(ifbm_fit_result_params(fit, &k, &c, nullptr, nullptr) == IFBM_ERROR_FIT_FAILURE);
  char* json = nullptr;
  REQUIRE(ifbm_fit_result_json(fit, nullptr, &json) == IFBM_OK);
  CHECK(take(json).find("fit failure") != std::string::npos);
  ifbm_fit_result_destroy(fit);
  ifbm_sample_destroy(data);
}

TEST_CASE("analyze report") {
  const ifbm_process proc{0.01, 0.05, 1.0, IFBM_DRIFT_MU_SCALED};
  char* out = nullptr;
  REQUIRE(ifbm_analyze_json(5.0, 1.0, &proc, nullptr, &out) == IFBM_OK);
  const auto text = take(out);
  CHECK(text.find("regions_notice") != std::string::npos);
  CHECK(text.find("exact_step_moments") != std::string::npos);
}
