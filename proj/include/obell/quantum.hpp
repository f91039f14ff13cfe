#pragma once

// Quantum predictions for the spin singlet (|+-> - |-+>)/sqrt(2).

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "obell/core.hpp"
#include "obell/rng.hpp"

namespace obell {

/// Maximum of the OB statistic over singlet correlations.
inline constexpr double kObQuantumMax = 1.5;
/// Tsirelson bound for CHSH.
inline constexpr double kTsirelson = 2.0 * std::numbers::sqrt2;

/// Marker for the singlet state. Its only observable content is the
/// correlation law E(a, b) = -a.b.
struct SingletState {};

/// Angles of the three-setting family used by the OB optimizer.
struct ObAngles {
  double phi1 = 0.0;
  double phi2 = 0.0;
  double theta = 0.0;
};

/// -a.b, clamped to [-1, 1] against rounding.
[[nodiscard]] double singlet_correlation(const MeasurementSetting& a, const MeasurementSetting& b);

/// P(a,b), P(a,c), P(b,c) for the singlet.
[[nodiscard]] CorrelationTriple singlet_correlations(const SettingTriple& settings);

/// |a.b - a.c| + b.c, the OB statistic of singlet correlations written
/// directly in inner products.
[[nodiscard]] double delta_q(const SettingTriple& settings);

/// 2 |sin phi1 sin phi2 sin theta| + 1 - 2 sin^2 phi1.
[[nodiscard]] double delta_q_parametrized(const ObAngles& angles);

/// Vector configuration on which delta_q equals delta_q_parametrized:
///
///   b = ( sin phi1, 0, cos phi1)
///   c = (-sin phi1, 0, cos phi1)
///   a = (sin phi2 sin theta, sin phi2 cos theta, cos phi2)
///
/// b and c sit at +-phi1 from the z axis, so b.c = cos 2 phi1 and
/// a.b - a.c = 2 sin phi1 (a.x) = 2 sin phi1 sin phi2 sin theta.
[[nodiscard]] SettingTriple settings_from_angles(const ObAngles& angles);

/// Thrown when an optimizer lands short of a known analytic optimum.
class OptimizerShortfall : public std::runtime_error {
 public:
  OptimizerShortfall(const std::string& what, double achieved, double target)
      : std::runtime_error(what), achieved_(achieved), target_(target) {}
  [[nodiscard]] double achieved() const { return achieved_; }
  [[nodiscard]] double target() const { return target_; }

 private:
  double achieved_;
  double target_;
};

struct OptimizerOptions {
  /// Grid points per angle for the coarse search.
  std::size_t grid_points = 64;
  /// Polish the best grid point with Nelder-Mead.
  bool refine = true;
};

struct ObOptimum {
  SettingTriple settings;
  ObAngles angles;
  double value = 0.0;
};

/// Coarse grid over (phi1, phi2, theta) in [0, pi/2]^3, then Nelder-Mead,
/// then conversion to vectors. The returned value is delta_q of the returned
/// settings. Throws InvalidArgument for tolerance <= 0 and OptimizerShortfall
/// if the result is below 3/2 - tolerance.
[[nodiscard]] ObOptimum maximize_delta_q(double tolerance, const OptimizerOptions& options = {});

/// |E(a,b) - E(a,b')| + |E(a',b) + E(a',b')|.
[[nodiscard]] double chsh_statistic(double e_ab, double e_ab2, double e_a2b, double e_a2b2);

/// CHSH statistic of singlet correlations at the given settings.
[[nodiscard]] double chsh_singlet(const ChshSettings& settings);

struct ChshOptimum {
  ChshSettings settings;
  /// Planar angles of a, a', b, b' (a is fixed at 0).
  std::array<double, 4> angles{};
  double value = 0.0;
};

/// Planar search: a fixed at angle 0, grid over (a', b, b') in [0, 2 pi),
/// Nelder-Mead polish. Same error contract as maximize_delta_q with target
/// 2 sqrt 2.
[[nodiscard]] ChshOptimum maximize_chsh(double tolerance, const OptimizerOptions& options = {});

/// Draws (alpha, beta) from P(alpha, beta) = (1 + alpha beta E) / 4 by
/// inverse CDF over the order (+,+), (+,-), (-,+), (-,-). Both marginals are
/// uniform and the product has mean E.
[[nodiscard]] std::pair<int, int> sample_correlated_pair(double correlation, RandomStream& rng);

/// Singlet outcomes at settings (a, b): the law above with E = -a.b.
[[nodiscard]] std::pair<int, int> sample_singlet_outcomes(const MeasurementSetting& a,
                                                          const MeasurementSetting& b,
                                                          RandomStream& rng);

}  // namespace obell
