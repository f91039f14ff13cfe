#include "obell/bounds.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace obell {

BoundReport ob_bounds() { return {1.0, 1.5, 1.5}; }

BoundReport chsh_bounds() {
  return {2.0, 2.0 * std::numbers::sqrt2, std::numbers::sqrt2};
}

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidArgument("epsilon must lie in [0, 1]");
}

void check_eta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("eta must lie in (0, 1]");
}

}  // namespace

double theorem2_bound(double epsilon) {
  check_epsilon(epsilon);
  return 1.0 + 2.0 * epsilon;
}

double theorem2_bound_gamma(double gamma) {
  check_epsilon(1.0 - gamma);
  return 3.0 - 2.0 * gamma;
}

double theorem3_bound(double eta) {
  check_eta(eta);
  return (4.0 - 3.0 * eta) / eta;
}

double theorem4_bound(const NoiseParameters& p) {
  return (4.0 + 2.0 * p.epsilon() - 3.0 * p.eta()) / p.eta();
}

double theorem4_bound_gamma(double gamma, double eta) {
  check_epsilon(1.0 - gamma);
  check_eta(eta);
  return (6.0 - 2.0 * gamma - 3.0 * eta) / eta;
}

Rational theorem2_bound(const Rational& epsilon) { return Rational(1) + Rational(2) * epsilon; }

Rational theorem3_bound(const Rational& eta) {
  return (Rational(4) - Rational(3) * eta) / eta;
}

Rational theorem4_bound(const Rational& epsilon, const Rational& eta) {
  return (Rational(4) + Rational(2) * epsilon - Rational(3) * eta) / eta;
}

bool violation_feasible(const NoiseParameters& p) {
  return 4.0 * p.gamma() + 9.0 * p.eta() - 12.0 > kFeasibilityBoundaryTolerance;
}

std::vector<double> grid_values(const Range& r, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("step must be positive");
  if (!(r.lo <= r.hi)) throw InvalidArgument("empty range: lo must not exceed hi");
  const auto count = static_cast<std::size_t>(std::floor((r.hi - r.lo) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double v = r.lo + static_cast<double>(i) * step;
    out.push_back(std::round(v * 1e12) / 1e12);
  }
  return out;
}

std::vector<FeasibilityRow> feasibility_grid(const Range& gamma, const Range& eta, double step) {
  if (gamma.lo < 0.0 || gamma.hi > 1.0) throw InvalidArgument("gamma range must lie in [0, 1]");
  if (eta.lo <= 0.0 || eta.hi > 1.0) throw InvalidArgument("eta range must lie in (0, 1]");
  const auto gammas = grid_values(gamma, step);
  const auto etas = grid_values(eta, step);
  std::vector<FeasibilityRow> rows;
  rows.reserve(gammas.size() * etas.size());
  for (double g : gammas) {
    for (double e : etas) {
      const auto p = NoiseParameters::from_gamma(g, e);
      rows.push_back({g, e, theorem4_bound(p), violation_feasible(p)});
    }
  }
  return rows;
}

void write_feasibility_csv(std::ostream& os, const std::vector<FeasibilityRow>& rows) {
  os << "gamma,eta,bound,feasible\n";
  char line[128];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f,%s\n", r.gamma, r.eta, r.bound,
                  r.feasible ? "true" : "false");
    os << line;
  }
}

double white_noise_quantum_value(double gamma) {
  check_epsilon(1.0 - gamma);
  return 1.5 * gamma;
}

}  // namespace obell
