#include <cmath>
#include <sstream>

#include "doctest.h"
#include "obell/bounds.hpp"
#include "obell/experiment.hpp"
#include "obell/lhv.hpp"
#include "obell/quantum.hpp"

using namespace obell;

namespace {

SettingTriple worked_example() {
  const double h = std::sqrt(3.0) / 2.0;
  return {make_setting({1, 0, 0}), make_setting({0.5, -h, 0}), make_setting({-0.5, -h, 0})};
}

ExperimentSpec quantum_spec(std::uint64_t trials, std::uint64_t seed) {
  ExperimentSpec s;
  s.settings = worked_example();
  s.trials_per_pair = trials;
  s.seed = seed;
  return s;
}

std::string fingerprint(const ExperimentResult& r) { return to_json(r).dump(); }

}  // namespace

TEST_CASE("spec validation") {
  auto s = quantum_spec(0, 1);
  s.detection = 0.0;
  s.fair_sampling = false;
  const auto errors = validate_spec(s);
  CHECK(errors.size() >= 3);
  CHECK_THROWS_AS((void)run_experiment(s), ConfigError);

  ExperimentSpec lhv;
  lhv.source = SourceKind::lhv;
  CHECK_FALSE(validate_spec(lhv).empty());  // no model
  lhv.model = HiddenVariableModel::from_strategies({1.0}, {DeterministicStrategy::anticorrelated({1, 1, 1})});
  CHECK(validate_spec(lhv).empty());
  lhv.settings = ChshSettings{};
  CHECK_FALSE(validate_spec(lhv).empty());  // CHSH needs measurement axes
}

TEST_CASE("detection censor") {
  RandomStream rng(1);
  const TrialRecord rec{SettingPair{Label::a, Label::b}, 1, -1, true};
  for (int i = 0; i < 1000; ++i) CHECK(detection_censor(rec, 1.0, rng, true).detected);

  const int n = 1000000;
  int detected = 0;
  for (int i = 0; i < n; ++i) detected += detection_censor(rec, 0.9, rng, true).detected;
  CHECK(std::abs(detected / double(n) - 0.9) < 0.001);

  CHECK_FALSE(detection_censor(rec, 0.9, rng, false, false).detected);
  CHECK(detection_censor(rec, 0.9, rng, false, true).detected);
  CHECK_THROWS_AS((void)detection_censor(rec, 0.9, rng, false), InvalidArgument);
}

TEST_CASE("runs are reproducible and independent of thread count") {
  auto s = quantum_spec(20000, 99);
  s.detection = 0.8;
  const auto one = fingerprint(run_experiment(s, 1));
  CHECK(one == fingerprint(run_experiment(s, 1)));
  CHECK(one == fingerprint(run_experiment(s, 4)));
  s.seed = 100;
  CHECK(one != fingerprint(run_experiment(s, 1)));
}

TEST_CASE("estimator bookkeeping") {
  auto s = quantum_spec(5000, 3);
  s.detection = 0.7;
  const auto r = run_experiment(s);
  REQUIRE(r.pairs.size() == 3);
  double var = 0.0;
  for (const auto& p : r.pairs) {
    CHECK(p.trials == 5000);
    CHECK(p.detected <= p.trials);
    CHECK(p.correlation == double(p.product_sum) / double(p.detected));
    CHECK(p.se == doctest::Approx(std::sqrt((1 - p.correlation * p.correlation) / double(p.detected))));
    var += p.se * p.se;
  }
  CHECK(r.statistic_se == doctest::Approx(std::sqrt(var)));
  CHECK(r.statistic == doctest::Approx(ob_statistic(CorrelationTriple{r.pairs[0].correlation, r.pairs[1].correlation,
                                                     r.pairs[2].correlation})));
  CHECK(r.bound_used == doctest::Approx(theorem3_bound(0.7)));
}

TEST_CASE("quantum source reproduces 3/2 and violates the classical bound") {
  const auto r = run_experiment(quantum_spec(1000000, 2024), 0);
  CHECK(std::abs(r.statistic - 1.5) < 3 * r.statistic_se);
  CHECK(r.bound_used == 1.0);
  CHECK(r.violation_sigma > 5);
  const auto small = run_experiment(quantum_spec(100000, 5), 0);
  CHECK(small.violation_sigma > 5);
}

TEST_CASE("white noise at gamma 0.98, eta 0.9 does not violate") {
  auto s = quantum_spec(1000000, 8);
  s.source = SourceKind::quantum_white_noise;
  s.gamma = 0.98;
  s.detection = 0.9;
  const auto r = run_experiment(s, 0);
  CHECK(std::abs(r.statistic - 1.47) < 3 * r.statistic_se);
  CHECK(r.bound_used == doctest::Approx(theorem4_bound_gamma(0.98, 0.9)));
  CHECK(r.statistic - 3 * r.statistic_se < r.bound_used);
  CHECK(r.noise_model.find("white") != std::string::npos);
}

TEST_CASE("chsh run") {
  ExperimentSpec s;
  const double h = std::sqrt(0.5);
  s.settings = ChshSettings{make_setting({1, 0, 0}), make_setting({0, 1, 0}), make_setting({-h, h, 0}),
                            make_setting({h, h, 0})};
  s.trials_per_pair = 200000;
  s.seed = 4;
  const auto r = run_experiment(s, 0);
  CHECK(r.statistic_kind == "chsh");
  CHECK(r.pairs.size() == 4);
  CHECK(std::abs(r.statistic - kTsirelson) < 4 * r.statistic_se);
  CHECK(r.bound_used == 2.0);
}

TEST_CASE("zero detected trials name the pair") {
  auto s = quantum_spec(3, 1);
  s.detection = 1e-12;
  try {
    (void)run_experiment(s);
    FAIL("expected an error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("ab") != std::string::npos);
  }
}

TEST_CASE("fair-sampling estimates are unbiased") {
  // 10^4 repetitions of a 3-pair run; a 4-sigma miss has probability ~6e-5
  const double truth[3] = {-0.5, 0.5, -0.5};
  int outside = 0, total = 0;
  for (std::uint64_t rep = 0; rep < 10000; ++rep) {
    auto s = quantum_spec(1000, rep);
    s.detection = 0.9;
    const auto r = run_experiment(s);
    for (int k = 0; k < 3; ++k, ++total)
      outside += std::abs(r.pairs[k].correlation - truth[k]) >= 4 * r.pairs[k].se;
  }
  CHECK(outside <= total / 1000);

  // error shrinks with the trial count
  double previous = 1.0;
  for (std::uint64_t n : {10000ULL, 100000ULL, 1000000ULL}) {
    auto s = quantum_spec(n, 77);
    s.detection = 0.9;
    const auto r = run_experiment(s, 0);
    double worst = 0.0;
    for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(r.pairs[k].correlation - truth[k]));
    CHECK(worst < 4 * std::sqrt(0.75 / (0.9 * n)));
    CHECK(r.statistic_se < previous);
    previous = r.statistic_se;
  }
}

TEST_CASE("lhv sources never show a significant violation") {
  RandomStream rng(314);
  double worst = -1e9;
  for (int i = 0; i < 300; ++i) {
    ExperimentSpec s;
    s.source = SourceKind::lhv;
    s.trials_per_pair = 20000;
    s.seed = 1000 + i;
    const std::size_t atoms = 2 + rng.below(10);
    if (i % 3 == 0) {
      s.model = random_epsilon_model(rng, atoms, 0.05 * rng.below(8), i % 2 == 0);
    } else {
      const auto detect = 1 + rng.below(atoms);
      s.pattern = i % 2 ? ObPattern::detection : ObPattern::standard;
      s.model = random_detection_model(rng, atoms, i % 3 == 2 ? rng.below(atoms / 2 + 1) : 0, detect,
                                       DetectionPlacement::adversarial, s.pattern);
      s.fair_sampling = false;
      s.detection = std::min(1.0, s.model->detection_mass(SettingPair{Label::a, Label::b}));
    }
    const auto r = run_experiment(s);
    worst = std::max(worst, r.violation_sigma);
    CHECK(r.violation_sigma <= 5);
  }
  MESSAGE("largest LHV violation_sigma: " << worst);

  // perfectly anti-correlated model at eta = 1
  ExperimentSpec s;
  s.source = SourceKind::lhv;
  s.model = epsilon_ob_maximum(Rational(0), 4).witness;
  s.trials_per_pair = 1000000;
  const auto r = run_experiment(s, 0);
  CHECK(r.statistic <= 1 + 3 * r.statistic_se);
  CHECK(r.bound_used == 1.0);
}

TEST_CASE("sweep") {
  auto tmpl = quantum_spec(20000, 42);
  tmpl.source = SourceKind::quantum_white_noise;
  SUBCASE("one cell equals a direct run") {
    const auto cells = sweep(tmpl, {0.9}, {0.95});
    REQUIRE(cells.size() == 1);
    REQUIRE(cells[0].result);
    CHECK(fingerprint(*cells[0].result) == fingerprint(run_experiment(sweep_cell_spec(tmpl, 0.9, 0.95))));
  }
  SUBCASE("cell results do not depend on order or threads") {
    const auto a = sweep(tmpl, {0.8, 0.9, 1.0}, {0.9, 1.0}, 1);
    const auto b = sweep(tmpl, {1.0, 0.9, 0.8}, {1.0, 0.9}, 4);
    for (const auto& x : a)
      for (const auto& y : b)
        if (x.gamma == y.gamma && x.eta == y.eta) CHECK(fingerprint(*x.result) == fingerprint(*y.result));
  }
  SUBCASE("failed cells are recorded") {
    auto t = tmpl;
    t.trials_per_pair = 2;
    const auto cells = sweep(t, {1.0}, {1e-12, 1.0});
    CHECK_FALSE(cells[0].result);
    CHECK_FALSE(cells[0].error.empty());
    CHECK(cells[1].result);
  }
  SUBCASE("lhv templates are rejected") {
    ExperimentSpec lhv;
    lhv.source = SourceKind::lhv;
    CHECK_THROWS_AS((void)sweep(lhv, {1.0}, {1.0}), InvalidArgument);
  }
}

TEST_CASE("white-noise violation boundary sits near 6/7 at eta = 1") {
  auto tmpl = quantum_spec(1000000, 6);
  tmpl.source = SourceKind::quantum_white_noise;
  const auto cells = sweep(tmpl, {0.80, 0.83, 0.89, 0.92}, {1.0}, 0);
  for (const auto& c : cells) {
    REQUIRE(c.result);
    const bool violates = c.result->statistic - 3 * c.result->statistic_se > c.result->bound_used;
    CHECK(violates == (c.gamma > kWhiteNoiseCrossing));
  }
}

TEST_CASE("boundary cells do not show a significant violation") {
  auto tmpl = quantum_spec(200000, 12);
  tmpl.source = SourceKind::quantum_white_noise;
  // 4 gamma + 9 eta = 12 along a few rational points
  for (const auto& [g, e] : {std::pair{1.0, 8.0 / 9.0}, std::pair{0.9, 8.4 / 9.0},
                             std::pair{0.75, 1.0}}) {
    const auto r = run_experiment(sweep_cell_spec(tmpl, g, e), 0);
    CHECK(r.statistic - 3 * r.statistic_se <= r.bound_used);
  }
}

TEST_CASE("experiment csv") {
  ExperimentResult r;
  r.gamma = 0.98;
  r.eta = 0.9;
  r.statistic = 1.47;
  r.statistic_se = 0.0015;
  r.bound_used = 1.4888888888888889;
  r.violation_sigma = -12.5;
  std::ostringstream os;
  write_experiment_csv(os, {r});
  CHECK(os.str() ==
        "gamma,eta,statistic,se,bound,violation_sigma\n"
        "0.980000,0.900000,1.470000,0.001500,1.488889,-12.500000\n");
}
