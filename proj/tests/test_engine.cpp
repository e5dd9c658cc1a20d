#include <doctest.h>

#include <cmath>
#include <vector>

#include "ifbm/analytics.hpp"
#include "ifbm/engine.hpp"
#include "ifbm/error.hpp"
#include "ifbm/rng.hpp"

using namespace ifbm;

TEST_CASE("philox known answers") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}) ==
        C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::block(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                          K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::block(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                          K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("uniform mapping stays inside (0, 1)") {
  CHECK(uniform_open01(0) > 0.0);
  CHECK(uniform_open01(~std::uint64_t{0}) < 1.0);
  CHECK(std::isfinite(inverse_normal_cdf(uniform_open01(0))));
  CHECK(std::isfinite(inverse_normal_cdf(uniform_open01(~std::uint64_t{0}))));
  CHECK(uniform_open01(std::uint64_t{1} << 63) == doctest::Approx(0.5));
}

TEST_CASE("inverse normal cdf") {
  struct Ref {
    double p;
    double z;
  };
  const Ref refs[] = {
      {1e-300, -37.0470962993612},    {1e-10, -6.361340902404057},
      {0.025, -1.9599639845400543},   {0.3, -0.5244005127080408},
      {0.5, 0.0},                     {0.9, 1.2815515655446006},
      {0.975, 1.9599639845400538},    {0.9999999999990905, 7.047700256664409},
  };
  for (const auto& r : refs) {
    CAPTURE(r.p);
    CHECK(std::abs(inverse_normal_cdf(r.p) - r.z) < 1e-9 * std::max(1.0, std::abs(r.z)));
  }
  for (int i = 1; i < 1000; ++i) {
    const double p = i / 1000.0;
    REQUIRE(std::abs(normal_cdf(inverse_normal_cdf(p)) - p) < 1e-14);
  }
  CHECK(inverse_normal_cdf(0.0) == -INFINITY);
  CHECK(inverse_normal_cdf(1.0) == INFINITY);
  CHECK(std::isnan(inverse_normal_cdf(1.5)));
}

TEST_CASE("normal stream determinism and random access") {
  NormalStream a(123, 4);
  NormalStream b(123, 4);
  std::vector<double> xa(1001);
  std::vector<double> xb(1001);
  a.fill(xa);
  for (auto& x : xb) x = b();
  CHECK(xa == xb);
  CHECK(a.position() == 1001);
  const NormalStream c(123, 4);
  for (std::uint64_t i : {0u, 1u, 2u, 3u, 500u, 1000u}) CHECK(c.at(i) == xa[i]);
  CHECK(NormalStream(123, 0).at(0) != NormalStream(123, 1).at(0));
  CHECK(NormalStream(123, 0).at(0) != NormalStream(124, 0).at(0));
}

TEST_CASE("normal stream distribution") {
  std::vector<double> z;
  z.reserve(1'000'000);
  for (std::uint64_t p = 0; p < 100; ++p) {
    NormalStream s(2024, p);
    for (int i = 0; i < 10000; ++i) z.push_back(s());
  }
  const auto m = sample_moments(z);
  CHECK(std::abs(m.mean) < 5e-3);
  CHECK(std::abs(m.variance - 1.0) < 7e-3);
  CHECK(std::abs(*m.excess_kurtosis) < 0.02);
}

TEST_CASE("process parameters") {
  const ProcessParams p(0.01, 0.05, 1.0);
  CHECK(p.alpha() == p.mu() + 0.5 * p.sigma() * p.sigma());
  CHECK(p.drift_mode() == DriftMode::MuScaled);
  CHECK(ProcessParams(0.01, 0.05, 1.0, DriftMode::AlphaScaled).drift() == p.alpha());
  CHECK_NOTHROW(ProcessParams(0.01, 0.0, 1.0));
  CHECK_THROWS_AS(ProcessParams(0.01, -0.1, 1.0), Error);
  CHECK_THROWS_AS(ProcessParams(0.01, 0.1, 0.0), Error);
  CHECK_THROWS_AS(ProcessParams(std::nan(""), 0.1, 1.0), Error);
}

TEST_CASE("step_log_return") {
  const ProcessParams p(0.0005, 0.01, 1.0);
  CHECK(step_log_return(0.0, p, {-5.0, 1.0}) == 0.0005);
  CHECK(step_log_return(0.0, ProcessParams(0.3, 2.0, 0.25), {-17.0, 0.4}) == 0.3 * 0.25);
  CHECK(step_log_return(1.0, p, {-5.0, 1.0}) ==
        doctest::Approx(0.010081655077580896).epsilon(1e-14));
  for (double z : {-3.0, -0.2, 0.7, 2.5}) {
    CHECK(step_log_return(z, p, {0.0, 1.0}) == gbm_step(z, p));
    CHECK(gbm_step(z, p) == 0.0005 * 1.0 + 0.01 * z * 1.0);
  }
}

TEST_CASE("simulate single step uses the stream deviate") {
  const ProcessParams p(0.01, 0.05, 1.0);
  SimConfig cfg;
  cfg.master_seed = 99;
  const auto ps = simulate(p, {-5.0, 1.0}, cfg);
  REQUIRE(ps.log_returns().size() == 1);
  CHECK(ps.at(0, 0) == step_log_return(NormalStream(99, 0).at(0), p, {-5.0, 1.0}));
}

TEST_CASE("GBM reduction is bit-identical") {
  const ProcessParams p(0.0005, 0.01, 1.0);
  for (std::uint64_t seed : {0ull, 1ull, 987654321ull}) {
    SimConfig cfg;
    cfg.n_paths = 17;
    cfg.n_steps = 40;
    cfg.master_seed = seed;
    const auto a = simulate(p, {0.0, 2.0}, cfg);
    const auto b = simulate_gbm(p, cfg);
    CHECK(std::equal(a.log_returns().begin(), a.log_returns().end(), b.log_returns().begin(),
                     b.log_returns().end()));
    CHECK(a.has_feedback_term());
    CHECK_FALSE(b.has_feedback_term());
  }
}

TEST_CASE("thread count never changes output") {
  const ProcessParams p(0.01, 0.05, 1.0);
  SimConfig cfg;
  cfg.n_paths = 37;
  cfg.n_steps = 101;
  cfg.master_seed = 5;
  cfg.threads = 1;
  const auto ref = simulate(p, {-5.0, 1.0}, cfg);
  for (unsigned w : {2u, 4u, 8u}) {
    cfg.threads = w;
    const auto other = simulate(p, {-5.0, 1.0}, cfg);
    CHECK(std::equal(ref.log_returns().begin(), ref.log_returns().end(),
                     other.log_returns().begin(), other.log_returns().end()));
    CHECK(pool_returns(other).values().size() == pool_returns(ref).values().size());
  }
}

TEST_CASE("drift modes coincide when sigma is zero") {
  SimConfig cfg;
  cfg.n_paths = 3;
  cfg.n_steps = 50;
  const auto a = simulate(ProcessParams(0.02, 0.0, 1.0, DriftMode::MuScaled), {-5.0, 1.0}, cfg);
  const auto b = simulate(ProcessParams(0.02, 0.0, 1.0, DriftMode::AlphaScaled), {-5.0, 1.0}, cfg);
  CHECK(std::equal(a.log_returns().begin(), a.log_returns().end(), b.log_returns().begin(),
                   b.log_returns().end()));
}

TEST_CASE("prices") {
  const ProcessParams p(0.0005, 0.01, 1.0);
  SimConfig cfg;
  cfg.n_paths = 2;
  cfg.n_steps = 500;
  cfg.materialize_prices = true;
  cfg.initial_price = 50.0;
  const auto ps = simulate(p, {-5.0, 1.0}, cfg);
  REQUIRE(ps.has_prices());
  for (std::uint64_t path = 0; path < 2; ++path) {
    CHECK(ps.price(path, 0) == 50.0);
    for (std::uint64_t t = 0; t < 500; ++t) {
      REQUIRE(ps.price(path, t) > 0.0);
      REQUIRE(ps.price(path, t + 1) ==
              doctest::Approx(ps.price(path, t) * std::exp(ps.at(path, t))).epsilon(1e-15));
    }
  }
  cfg.materialize_prices = false;
  CHECK_FALSE(simulate(p, {-5.0, 1.0}, cfg).has_prices());
}

TEST_CASE("extreme parameters stay finite") {
  SimConfig cfg;
  cfg.n_paths = 4;
  cfg.n_steps = 2000;
  for (double k : {-100.0, 100.0}) {
    for (double c : {0.05, 50.0}) {
      const auto ps = simulate(ProcessParams(0.01, 0.05, 1.0), {k, c}, cfg);
      for (double r : ps.log_returns()) REQUIRE(std::isfinite(r));
    }
  }
}

TEST_CASE("sample cap and config validation") {
  SimConfig cfg;
  cfg.n_paths = 1000;
  cfg.n_steps = 1000;
  cfg.sample_cap = 999'999;
  try {
    simulate(ProcessParams(0.0, 1.0, 1.0), {0.0, 1.0}, cfg);
    FAIL("expected a resource error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Resource);
  }
  cfg = SimConfig{};
  cfg.n_paths = 0;
  CHECK_THROWS_AS(simulate(ProcessParams(0.0, 1.0, 1.0), {0.0, 1.0}, cfg), Error);
}

TEST_CASE("pool_returns") {
  SimConfig cfg;
  cfg.n_paths = 2;
  cfg.n_steps = 3;
  const auto ps = simulate(ProcessParams(0.01, 0.05, 1.0), {-5.0, 1.0}, cfg);
  const auto pooled = pool_returns(ps);
  REQUIRE(pooled.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(pooled.values()[i] == ps.log_returns()[i]);
  CHECK(pooled.source() == SampleSource::Simulated);

  const auto h = pool_returns(ps, 3);
  REQUIRE(h.size() == 2);
  CHECK(h.values()[0] == doctest::Approx(ps.at(0, 0) + ps.at(0, 1) + ps.at(0, 2)));
  CHECK_THROWS_AS(pool_returns(ps, 0), Error);
}

TEST_CASE("K=0 single-step distribution") {
  const ProcessParams p(0.0005, 0.01, 1.0);
  SimConfig cfg;
  cfg.n_paths = 1000;
  cfg.n_steps = 1000;
  cfg.master_seed = 31;
  const auto m = sample_moments(pool_returns(simulate(p, {0.0, 1.0}, cfg)));
  const double n = 1e6;
  const double var = 1e-4;
  CHECK(std::abs(m.mean - 0.0005) < 5 * std::sqrt(var / n));
  CHECK(std::abs(m.variance - var) < 5 * var * std::sqrt(2.0 / n));
}

TEST_CASE("feedback raises kurtosis over GBM") {
  const ProcessParams p(0.01, 0.05, 1.0);
  SimConfig cfg;
  cfg.n_paths = 100;
  cfg.n_steps = 1000;
  cfg.master_seed = 3;
  const auto ifbm = sample_moments(pool_returns(simulate(p, {-5.0, 1.0}, cfg)));
  const auto gbm = sample_moments(pool_returns(simulate(p, {0.0, 1.0}, cfg)));
  // Exact excess kurtosis is 2.2528 against 0; standard error at n = 1e5 is below 0.1.
  CHECK(*ifbm.excess_kurtosis - *gbm.excess_kurtosis > 1.5);
}
