#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ifbm/error.hpp"
#include "ifbm/feedback.hpp"

using namespace ifbm;

namespace {

const double kShapes[] = {0.25, 0.5, 1.0, 2.0, 4.0};

struct Pinned {
  double c;
  double root;
  double stat;
};

// High-precision reference values for sqrt(2 ln 2 / c) and the zero of f'.
const Pinned kPinned[] = {
    {0.05, 5.2655376954683185, 1.8704417540200313},
    {0.25, 2.3548200450309494, 1.0335801780683447},
    {0.5, 1.6651092223153955, 0.78150299473069556},
    {1.0, 1.1774100225154747, 0.58051861080079629},
    {2.0, 0.83255461115769776, 0.42412413119606341},
    {4.0, 0.58870501125773735, 0.30586187641074271},
    {50.0, 0.16651092223153955, 0.088345144822791201},
};

}  // namespace

TEST_CASE("eval_f point values") {
  CHECK(eval_f(0.0, 1.0) == 0.0);
  CHECK(std::abs(eval_f(std::sqrt(2.0 * std::log(2.0)), 1.0)) < 1e-15);
  CHECK(eval_f(10.0, 1.0) == doctest::Approx(-1.4711276743037346).epsilon(1e-14));
  CHECK(eval_f(1.0, 1.0) == doctest::Approx(0.16733796896764166).epsilon(1e-14));
}

TEST_CASE("eval_f is odd") {
  for (double c : kShapes) {
    for (int i = 0; i <= 20000; ++i) {
      const double z = -10.0 + 20.0 * i / 20000.0;
      REQUIRE(std::abs(eval_f(z, c) + eval_f(-z, c)) < 1e-13);
    }
  }
}

TEST_CASE("asymptotes") {
  // The envelope term has decayed completely by |z| = 20, leaving -arctan(z).
  CHECK(std::abs(eval_f(20.0, 1.0) + std::atan(20.0)) < 1e-8);
  CHECK(std::abs(eval_f(-20.0, 1.0) + std::atan(-20.0)) < 1e-8);
  // The approach to -sign(z) pi/2 is bounded by 1/|z|.
  for (double z : {20.0, 100.0, 1e4, 1e8}) {
    CHECK(std::abs(eval_f(z, 1.0) + std::numbers::pi / 2) < 1.0 / z);
    CHECK(std::abs(eval_f(-z, 1.0) - std::numbers::pi / 2) < 1.0 / z);
  }
}

TEST_CASE("eval_feedback") {
  for (double z : {-7.0, -1.0, 0.0, 0.3, 12.0}) CHECK(eval_feedback(z, {0.0, 1.0}) == 0.0);
  CHECK(eval_feedback(10.0, {-5.0, 1.0}) == doctest::Approx(7.355638371518673).epsilon(1e-13));
  const double root = find_root(1.0);
  for (int i = 1; i < 1000; ++i) {
    const double z = root * i / 1000.0;
    REQUIRE(eval_feedback(z, {-5.0, 1.0}) < 0.0);
    REQUIRE(eval_feedback(root + z, {-5.0, 1.0}) > 0.0);
  }
}

TEST_CASE("derivative") {
  for (double c : kShapes) CHECK(eval_f_derivative(0.0, c) == doctest::Approx(1.0));
  for (double c : kShapes) {
    for (int i = 0; i <= 2000; ++i) {
      const double z = -10.0 + 20.0 * i / 2000.0;
      const double d = eval_f_derivative(z, c);
      REQUIRE(d == doctest::Approx(eval_f_derivative(-z, c)).epsilon(1e-14));
      const double h = 1e-6;
      const double fd = (eval_f(z + h, c) - eval_f(z - h, c)) / (2 * h);
      REQUIRE(std::abs(d - fd) < 1e-6 * std::max(1.0, std::abs(d)));
    }
  }
  CHECK(eval_f_derivative(0.4, 1.0) > 0.0);
  CHECK(eval_f_derivative(0.8, 1.0) < 0.0);
}

TEST_CASE("roots and stationary points") {
  CHECK(find_root(1.0) == doctest::Approx(1.177410023).epsilon(1e-9));
  CHECK(find_root(2.0) == doctest::Approx(0.832554611).epsilon(1e-9));
  CHECK(find_root(0.5) == doctest::Approx(1.665109222).epsilon(1e-9));
  for (const auto& p : kPinned) {
    CAPTURE(p.c);
    CHECK(std::abs(find_root(p.c) - p.root) < 1e-13);
    CHECK(std::abs(find_stationary(p.c) - p.stat) < 1e-10);
    CHECK(std::abs(eval_f(find_root(p.c), p.c)) < 1e-12);
    const double s = find_stationary(p.c);
    CHECK(eval_f_derivative(s - 1e-4, p.c) * eval_f_derivative(s + 1e-4, p.c) < 0.0);
    const auto cp = critical_points(p.c);
    CHECK(0.0 < cp.z_stat_pos);
    CHECK(cp.z_stat_pos < cp.z_root_pos);
  }
  CHECK(eval_f(find_stationary(1.0), 1.0) == doctest::Approx(0.36284739002440833).epsilon(1e-12));
  for (double k : {-1.0, -5.0, -10.0}) {
    const double s = find_stationary(1.0);
    CHECK(std::abs(eval_feedback(s, {k, 1.0})) == std::abs(eval_feedback(-s, {k, 1.0})));
  }
}

TEST_CASE("shape parameter validation") {
  CHECK_THROWS_AS(eval_f(1.0, 0.0), Error);
  CHECK_THROWS_AS(eval_f(1.0, -1.0), Error);
  CHECK_THROWS_AS(find_root(-1.0), Error);
  CHECK_THROWS_AS(eval_feedback(1.0, {std::nan(""), 1.0}), Error);
  try {
    eval_f(1.0, -1.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Domain);
    CHECK(std::string(e.what()).find("c > 0") != std::string::npos);
  }
}

TEST_CASE("classify_region") {
  const FeedbackParams p{-5.0, 1.0};
  CHECK(classify_region(0.3, p) == Region::Region1);
  CHECK(classify_region(0.9, p) == Region::Region2);
  CHECK(classify_region(2.0, p) == Region::Region3);
  CHECK(classify_region(-0.3, p) == Region::Region4);
  CHECK(classify_region(-0.9, p) == Region::Region5);
  CHECK(classify_region(-2.0, p) == Region::Region6);
  CHECK(classify_region(0.0, p) == Region::Boundary);
  CHECK(classify_region(find_root(1.0), p) == Region::Boundary);
  CHECK(classify_region(-find_stationary(1.0), p) == Region::Boundary);
  CHECK_THROWS_AS(classify_region(0.3, {0.0, 1.0}), Error);
  CHECK_THROWS_AS(classify_region(0.3, {2.0, 1.0}), Error);
  try {
    classify_region(0.3, {2.0, 1.0});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Unsupported);
  }
}

TEST_CASE("feedback_sign") {
  const FeedbackParams p{-5.0, 1.0};
  CHECK(feedback_sign(0.5, p) == FeedbackSign::Negative);
  CHECK(feedback_sign(-3.0, p) == FeedbackSign::Positive);
  CHECK(feedback_sign(find_root(1.0), p) == FeedbackSign::Zero);
  CHECK(feedback_sign(0.0, p) == FeedbackSign::Zero);
  CHECK(feedback_sign(1.0, {0.0, 1.0}) == FeedbackSign::Zero);

  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> zd(-6.0, 6.0);
  for (int i = 0; i < 100000; ++i) {
    const double z = zd(gen);
    const double v = z * p.k * eval_f(z, p.c);
    const FeedbackSign s = feedback_sign(z, p);
    if (s == FeedbackSign::Zero) continue;
    REQUIRE((v < 0.0) == (s == FeedbackSign::Negative));
  }
}

TEST_CASE("region and sign coherence") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> zd(-8.0, 8.0);
  std::uniform_real_distribution<double> cd(0.05, 50.0);
  for (int i = 0; i < 20000; ++i) {
    const FeedbackParams p{-5.0, cd(gen)};
    const double z = zd(gen);
    const Region r = classify_region(z, p);
    if (r == Region::Boundary) continue;
    const FeedbackSign expect =
        is_negative_feedback_region(r) ? FeedbackSign::Negative : FeedbackSign::Positive;
    REQUIRE(feedback_sign(z, p) == expect);
  }
}

TEST_CASE("emit_curve") {
  const auto curve = emit_curve({-5.0, 1.0}, -4.0, 4.0, 801);
  REQUIRE(curve.z.size() == 801);
  CHECK(curve.z.front() == -4.0);
  CHECK(curve.z.back() == 4.0);
  REQUIRE(curve.regions.size() == 801);
  for (std::size_t i = 0; i < curve.z.size(); ++i) {
    REQUIRE(curve.value[i] == eval_feedback(curve.z[i], {-5.0, 1.0}));
  }

  auto crossings = [](const Curve& c) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i < c.value.size(); ++i) {
      if ((c.value[i - 1] < 0) != (c.value[i] < 0)) out.push_back(i);
    }
    return out;
  };
  const auto base = crossings(emit_curve({-1.0, 1.0}, -4.0, 4.0, 801));
  CHECK(crossings(emit_curve({-5.0, 1.0}, -4.0, 4.0, 801)) == base);
  CHECK(crossings(emit_curve({-10.0, 1.0}, -4.0, 4.0, 801)) == base);

  for (double c : {0.5, 1.0, 2.0}) {
    const auto cv = emit_curve({-5.0, c}, -4.0, 4.0, 8001);
    const double root = std::sqrt(2.0 * std::log(2.0) / c);
    int near = 0;
    for (std::size_t i : crossings(cv)) {
      const double mid = 0.5 * (cv.z[i - 1] + cv.z[i]);
      if (std::abs(std::abs(mid) - root) < 1e-3) ++near;
    }
    CHECK(near == 2);
  }

  CHECK(emit_curve({0.0, 1.0}, -1.0, 1.0, 3).regions.empty());
  CHECK_THROWS_AS(emit_curve({-5.0, 1.0}, 1.0, -1.0, 10), Error);
  CHECK_THROWS_AS(emit_curve({-5.0, 1.0}, -1.0, 1.0, 1), Error);
}

TEST_CASE("emit_surface") {
  const FeedbackParams p{-5.0, 1.0};
  const auto surface = emit_surface(p, ZGrid{}, 25);
  const auto curve = emit_curve(p, -4.0, 4.0, 801);
  REQUIRE(surface.t_steps == 25);
  for (std::size_t t = 0; t < surface.t_steps; ++t) {
    const auto s = surface.slice(t);
    REQUIRE(std::equal(s.begin(), s.end(), curve.value.begin(), curve.value.end()));
  }
  const auto one = emit_surface(p, ZGrid{}, 1);
  CHECK(one.values == curve.value);
  const auto zero = emit_surface({0.0, 1.0}, ZGrid{}, 3);
  for (double v : zero.values) REQUIRE(v == 0.0);
  CHECK_THROWS_AS(emit_surface(p, ZGrid{}, 0), Error);
}
