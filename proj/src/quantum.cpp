#include "obell/quantum.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <vector>

#include "obell/nelder_mead.hpp"

namespace obell {

double singlet_correlation(const MeasurementSetting& a, const MeasurementSetting& b) {
  return std::clamp(-dot(a, b), -1.0, 1.0);
}

CorrelationTriple singlet_correlations(const SettingTriple& s) {
  return {singlet_correlation(s.a, s.b), singlet_correlation(s.a, s.c),
          singlet_correlation(s.b, s.c)};
}

double delta_q(const SettingTriple& s) {
  return std::abs(dot(s.a, s.b) - dot(s.a, s.c)) + dot(s.b, s.c);
}

double delta_q_parametrized(const ObAngles& t) {
  const double s1 = std::sin(t.phi1);
  return 2.0 * std::abs(s1 * std::sin(t.phi2) * std::sin(t.theta)) + 1.0 - 2.0 * s1 * s1;
}

SettingTriple settings_from_angles(const ObAngles& t) {
  const double s1 = std::sin(t.phi1), c1 = std::cos(t.phi1);
  const double s2 = std::sin(t.phi2), c2 = std::cos(t.phi2);
  return {make_setting({s2 * std::sin(t.theta), s2 * std::cos(t.theta), c2}),
          make_setting({s1, 0.0, c1}), make_setting({-s1, 0.0, c1})};
}

namespace {

void check_tolerance(double tolerance) {
  if (!(tolerance > 0.0) || !std::isfinite(tolerance))
    throw InvalidArgument("tolerance must be positive");
}

void check_grid(const OptimizerOptions& o) {
  if (o.grid_points < 2) throw InvalidArgument("optimizer grid needs at least 2 points per angle");
}

[[noreturn]] void shortfall(const char* what, double achieved, double target, double tolerance) {
  std::ostringstream os;
  os.precision(12);
  os << what << " optimizer reached " << achieved << ", short of " << target << " by more than "
     << tolerance;
  throw OptimizerShortfall(os.str(), achieved, target);
}

}  // namespace

ObOptimum maximize_delta_q(double tolerance, const OptimizerOptions& options) {
  check_tolerance(tolerance);
  check_grid(options);
  // The objective depends on the angles only through |sin| and sin^2, so a
  // quarter period per angle covers every value.
  const std::size_t n = options.grid_points;
  const double step = (std::numbers::pi / 2.0) / static_cast<double>(n - 1);
  ObAngles best{};
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        const ObAngles t{step * i, step * j, step * k};
        const double v = delta_q_parametrized(t);
        if (v > best_value) {
          best_value = v;
          best = t;
        }
      }
    }
  }

  if (options.refine) {
    auto objective = [](const std::vector<double>& x) {
      return delta_q_parametrized({x[0], x[1], x[2]});
    };
    NelderMeadOptions nm;
    nm.initial_step = step / 2.0;
    auto polished = nelder_mead_maximize(objective, {best.phi1, best.phi2, best.theta}, nm);
    if (polished.value > best_value) best = {polished.x[0], polished.x[1], polished.x[2]};
  }

  ObOptimum out{settings_from_angles(best), best, 0.0};
  out.value = delta_q(out.settings);
  if (out.value < kObQuantumMax - tolerance) shortfall("OB", out.value, kObQuantumMax, tolerance);
  return out;
}

double chsh_statistic(double e_ab, double e_ab2, double e_a2b, double e_a2b2) {
  return std::abs(e_ab - e_ab2) + std::abs(e_a2b + e_a2b2);
}

double chsh_singlet(const ChshSettings& s) {
  return chsh_statistic(singlet_correlation(s.a, s.b), singlet_correlation(s.a, s.b_prime),
                        singlet_correlation(s.a_prime, s.b),
                        singlet_correlation(s.a_prime, s.b_prime));
}

namespace {

ChshSettings planar_chsh(const std::array<double, 4>& angles) {
  return {MeasurementSetting::planar(angles[0]), MeasurementSetting::planar(angles[1]),
          MeasurementSetting::planar(angles[2]), MeasurementSetting::planar(angles[3])};
}

double planar_chsh_value(double a2, double b, double b2) {
  // E(x, y) = -cos(x - y) for planar singlet settings, with a at angle 0.
  return chsh_statistic(-std::cos(b), -std::cos(b2), -std::cos(a2 - b), -std::cos(a2 - b2));
}

}  // namespace

ChshOptimum maximize_chsh(double tolerance, const OptimizerOptions& options) {
  check_tolerance(tolerance);
  check_grid(options);
  const std::size_t n = options.grid_points;
  const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
  std::array<double, 3> best{};
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        const double v = planar_chsh_value(step * i, step * j, step * k);
        if (v > best_value) {
          best_value = v;
          best = {step * i, step * j, step * k};
        }
      }
    }
  }
  if (options.refine) {
    auto objective = [](const std::vector<double>& x) { return planar_chsh_value(x[0], x[1], x[2]); };
    NelderMeadOptions nm;
    nm.initial_step = step / 2.0;
    auto polished = nelder_mead_maximize(objective, {best[0], best[1], best[2]}, nm);
    if (polished.value > best_value) best = {polished.x[0], polished.x[1], polished.x[2]};
  }

  ChshOptimum out;
  out.angles = {0.0, best[0], best[1], best[2]};
  out.settings = planar_chsh(out.angles);
  out.value = chsh_singlet(out.settings);
  if (out.value < kTsirelson - tolerance) shortfall("CHSH", out.value, kTsirelson, tolerance);
  return out;
}

std::pair<int, int> sample_correlated_pair(double correlation, RandomStream& rng) {
  const double same = (1.0 + correlation) / 4.0;  // P(+,+) = P(-,-)
  const double diff = (1.0 - correlation) / 4.0;  // P(+,-) = P(-,+)
  const double u = rng.uniform();
  if (u < same) return {1, 1};
  if (u < same + diff) return {1, -1};
  if (u < same + 2.0 * diff) return {-1, 1};
  return {-1, -1};
}

std::pair<int, int> sample_singlet_outcomes(const MeasurementSetting& a,
                                            const MeasurementSetting& b, RandomStream& rng) {
  return sample_correlated_pair(singlet_correlation(a, b), rng);
}

}  // namespace obell
