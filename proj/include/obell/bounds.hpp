#pragma once

// Closed-form classical and quantum bounds, noise-robust OB bounds and the
// (gamma, eta) feasibility region.

#include <iosfwd>
#include <vector>

#include "obell/core.hpp"

namespace obell {

struct BoundReport {
  double classical_bound = 0.0;
  double quantum_bound = 0.0;
  double fraction = 0.0;
};

/// Classical 1, quantum 3/2, fraction 3/2.
[[nodiscard]] BoundReport ob_bounds();
/// Classical 2, quantum 2 sqrt 2, fraction sqrt 2.
[[nodiscard]] BoundReport chsh_bounds();

/// 1 + 2 epsilon. Throws InvalidArgument outside [0, 1].
[[nodiscard]] double theorem2_bound(double epsilon);
/// Same bound written with gamma = 1 - epsilon: 3 - 2 gamma.
[[nodiscard]] double theorem2_bound_gamma(double gamma);

/// (4 - 3 eta) / eta. Throws InvalidArgument for eta outside (0, 1].
[[nodiscard]] double theorem3_bound(double eta);

/// (4 + 2 epsilon - 3 eta) / eta.
[[nodiscard]] double theorem4_bound(const NoiseParameters& p);
/// (6 - 2 gamma - 3 eta) / eta, the same bound in terms of gamma.
[[nodiscard]] double theorem4_bound_gamma(double gamma, double eta);

/// Exact forms over fractions, for oracle comparisons.
[[nodiscard]] Rational theorem2_bound(const Rational& epsilon);
[[nodiscard]] Rational theorem3_bound(const Rational& eta);
[[nodiscard]] Rational theorem4_bound(const Rational& epsilon, const Rational& eta);

/// Noise within this distance of the line 4 gamma + 9 eta = 12 counts as on
/// the boundary, where violation is impossible. Absorbs decimal rounding such
/// as 4 * 0.84 + 9 * 0.96 evaluating to 12 + 2e-15.
inline constexpr double kFeasibilityBoundaryTolerance = 1e-12;

/// 4 gamma + 9 eta > 12 (strict), i.e. the quantum maximum 3/2 exceeds
/// theorem4_bound.
[[nodiscard]] bool violation_feasible(const NoiseParameters& p);

/// Inclusive value range [lo, hi].
struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// lo, lo + step, ... up to hi (inclusive, with 1e-9 * step slack). Each
/// value is rounded to 12 decimals so decimal grids land on decimal values.
[[nodiscard]] std::vector<double> grid_values(const Range& r, double step);

struct FeasibilityRow {
  double gamma = 0.0;
  double eta = 0.0;
  double bound = 0.0;
  bool feasible = false;
};

/// Row-major over gamma (outer) and eta (inner). Ranges must lie inside
/// [0, 1] with lo <= hi, eta > 0, and step > 0.
[[nodiscard]] std::vector<FeasibilityRow> feasibility_grid(const Range& gamma, const Range& eta,
                                                           double step);

/// CSV with header gamma,eta,bound,feasible; six decimals, true/false.
void write_feasibility_csv(std::ostream& os, const std::vector<FeasibilityRow>& rows);

/// 1.5 gamma: the OB value reachable by a singlet mixed with white noise of
/// weight 1 - gamma (every correlation scaled by gamma). This ties gamma to a
/// visibility, which is a modelling choice: the anti-correlation defect gamma
/// is an ensemble fraction and coincides with visibility only under this
/// white-noise identification.
[[nodiscard]] double white_noise_quantum_value(double gamma);

/// gamma at which 1.5 gamma meets 3 - 2 gamma: 6/7.
inline constexpr double kWhiteNoiseCrossing = 6.0 / 7.0;

}  // namespace obell
