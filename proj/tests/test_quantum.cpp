#include <chrono>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "obell/quantum.hpp"

using namespace obell;

namespace {

const double kHalfRoot3 = std::sqrt(3.0) / 2.0;

SettingTriple worked_example() {
  return {make_setting({1.0, 0.0, 0.0}), make_setting({0.5, -kHalfRoot3, 0.0}),
          make_setting({-0.5, -kHalfRoot3, 0.0})};
}

MeasurementSetting random_setting(RandomStream& rng) {
  // Gaussian direction via Box-Muller.
  Vec3 v{};
  for (auto& x : v) {
    const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
    x = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  return make_setting(v);
}

}  // namespace

TEST_CASE("singlet correlation") {
  const auto x = make_setting({1, 0, 0});
  const auto z = make_setting({0, 0, 1});
  CHECK(singlet_correlation(x, x) == -1.0);
  CHECK(singlet_correlation(x, z) == 0.0);
  RandomStream rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_setting(rng), b = random_setting(rng);
    CHECK(singlet_correlation(a, b) == singlet_correlation(b, a));
    CHECK(singlet_correlation(a, a) == doctest::Approx(-1.0).epsilon(1e-15));
  }
}

TEST_CASE("worked example") {
  const auto t = singlet_correlations(worked_example());
  CHECK(t.p_ab == -0.5);
  CHECK(t.p_ac == 0.5);
  CHECK(t.p_bc == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(delta_q(worked_example()) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("delta_q simple configurations") {
  const auto x = make_setting({1, 0, 0});
  const auto y = make_setting({0, 1, 0});
  const auto z = make_setting({0, 0, 1});
  CHECK(delta_q({x, x, x}) == 1.0);
  CHECK(delta_q({x, y, z}) == 0.0);
  CHECK(delta_q({x, y, make_setting({-1, 0, 0})}) == 1.0);
}

TEST_CASE("parametrized form agrees with the inner-product form") {
  RandomStream rng(17);
  for (int i = 0; i < 20000; ++i) {
    const ObAngles ang{rng.uniform() * 2 * std::numbers::pi, rng.uniform() * 2 * std::numbers::pi,
                       rng.uniform() * 2 * std::numbers::pi};
    const double p = delta_q_parametrized(ang);
    CHECK(p == doctest::Approx(delta_q(settings_from_angles(ang))).epsilon(1e-12));
    CHECK(p <= 1.5 + 1e-12);
    CHECK(p >= -1.0 - 1e-12);
  }
  const ObAngles best{std::numbers::pi / 6, std::numbers::pi / 2, std::numbers::pi / 2};
  CHECK(delta_q_parametrized(best) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("delta_q never exceeds 3/2 over random triples") {
  RandomStream rng(23);
  double worst = -10;
  for (int i = 0; i < 100000; ++i) {
    const SettingTriple t{random_setting(rng), random_setting(rng), random_setting(rng)};
    worst = std::max(worst, delta_q(t));
  }
  CHECK(worst <= 1.5 + 1e-12);
  CHECK(worst > 1.3);
}

TEST_CASE("optimizers reach the analytic maxima") {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ob = maximize_delta_q(1e-6);
  CHECK(std::abs(ob.value - 1.5) <= 1e-6);
  CHECK(delta_q(ob.settings) == doctest::Approx(ob.value).epsilon(1e-12));
  const auto chsh = maximize_chsh(1e-6);
  CHECK(std::abs(chsh.value - kTsirelson) <= 1e-6);
  CHECK(chsh.value >= 2.0);
  CHECK(chsh_singlet(chsh.settings) == doctest::Approx(chsh.value).epsilon(1e-12));
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(5));
  CHECK_THROWS_AS((void)maximize_delta_q(0.0), InvalidArgument);
  CHECK_THROWS_AS((void)maximize_chsh(-1.0), InvalidArgument);
}

TEST_CASE("optimizer shortfall is reported") {
  OptimizerOptions coarse;
  coarse.grid_points = 3;
  coarse.refine = false;
  CHECK_THROWS_AS((void)maximize_delta_q(1e-9, coarse), OptimizerShortfall);
}

TEST_CASE("chsh statistic") {
  const double r = std::sqrt(2.0) / 2.0;
  CHECK(chsh_statistic(r, -r, -r, -r) == doctest::Approx(kTsirelson).epsilon(1e-15));
  CHECK(chsh_statistic(1, 1, 1, 1) == 2.0);
  CHECK(chsh_statistic(0, 0, 0, 0) == 0.0);
  const ChshSettings tsirelson{MeasurementSetting::planar(0), MeasurementSetting::planar(std::numbers::pi / 2),
                               MeasurementSetting::planar(3 * std::numbers::pi / 4),
                               MeasurementSetting::planar(std::numbers::pi / 4)};
  CHECK(chsh_singlet(tsirelson) == doctest::Approx(kTsirelson).epsilon(1e-15));

  RandomStream rng(29);
  for (int i = 0; i < 20000; ++i) {
    const ChshSettings s{random_setting(rng), random_setting(rng), random_setting(rng), random_setting(rng)};
    CHECK(chsh_singlet(s) <= kTsirelson + 1e-9);
  }
}

TEST_CASE("singlet sampler") {
  const auto x = make_setting({1, 0, 0});
  RandomStream rng(31);
  SUBCASE("equal settings are always opposite") {
    for (int i = 0; i < 10000; ++i) {
      const auto [p, q] = sample_singlet_outcomes(x, x, rng);
      CHECK(p == -q);
    }
  }
  SUBCASE("orthogonal settings are uniform over the four outcomes") {
    const auto y = make_setting({0, 1, 0});
    std::array<int, 4> count{};
    const int n = 400000;
    for (int i = 0; i < n; ++i) {
      const auto [p, q] = sample_singlet_outcomes(x, y, rng);
      ++count[(p < 0) * 2 + (q < 0)];
    }
    for (int c : count) CHECK(std::abs(c / double(n) - 0.25) < 4 * std::sqrt(0.1875 / n));
  }
  SUBCASE("a.b = 1/2 gives correlation -1/2") {
    const auto b = make_setting({0.5, kHalfRoot3, 0});
    const int n = 1000000;
    long long prod = 0, alice = 0, bob = 0;
    for (int i = 0; i < n; ++i) {
      const auto [p, q] = sample_singlet_outcomes(x, b, rng);
      prod += p * q;
      alice += p;
      bob += q;
    }
    const double rho = prod / double(n);
    CHECK(std::abs(rho + 0.5) < 3 * std::sqrt(0.75 / n));
    CHECK(std::abs(alice / double(n)) < 4 / std::sqrt(double(n)));
    CHECK(std::abs(bob / double(n)) < 4 / std::sqrt(double(n)));
  }
}
