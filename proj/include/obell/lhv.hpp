#pragma once

// Local hidden-variable models: exact correlations, exhaustive enumeration of
// deterministic strategies, and constructors/oracles for models with
// imperfect anti-correlation (defect mass epsilon per setting) and
// setting-independent joint detection efficiency eta.

#include <map>
#include <set>
#include <utility>
#include <vector>

#include "obell/core.hpp"
#include "obell/rng.hpp"

namespace obell {

/// Largest atom count for the exact defect oracle.
inline constexpr std::size_t kMaxEpsilonAtoms = 12;
/// Largest atom count for the exact detection oracle.
inline constexpr std::size_t kMaxDetectionAtoms = 10;

/// P(s,t) = sum over atoms of w * A_s * B_t. Throws InvalidModel.
[[nodiscard]] double lhv_correlation(const HiddenVariableModel& m, Label s, Label t);

/// P~(s,t): the same sum restricted to Gamma_st, divided by its mass.
/// Throws InvalidModel, or InvalidArgument when Gamma_st has zero mass.
[[nodiscard]] double lhv_conditional_correlation(const HiddenVariableModel& m, Label s, Label t);

[[nodiscard]] CorrelationTriple lhv_correlations(const HiddenVariableModel& m);
[[nodiscard]] CorrelationTriple lhv_conditional_correlations(const HiddenVariableModel& m);

/// All deterministic strategies, in lexicographic order of the outcome
/// tuple (A_a, A_b, A_c, B_a, B_b, B_c) with -1 before +1. With
/// `perfect_anticorrelation` Bob's outcomes are fixed to -A and only the
/// 8 tuples (A_a, A_b, A_c) vary; otherwise all 64 tuples are listed.
[[nodiscard]] std::vector<DeterministicStrategy> enumerate_strategies(bool perfect_anticorrelation);

/// Exact OB statistic of a single deterministic strategy.
[[nodiscard]] Rational strategy_statistic(const DeterministicStrategy& s,
                                          ObPattern pattern = ObPattern::standard);

struct ClassicalMaximum {
  Rational maximum;
  std::size_t strategies = 0;
  /// Statistic of every enumerated strategy, same order as enumerate_strategies.
  std::vector<Rational> values;
  DeterministicStrategy witness;
};

/// Maximum of the OB statistic over every deterministic strategy.
///
/// This is also the maximum over all mixed LHV models. For a mixture with
/// weights w_i the statistic is max over sign of (sign (P(x) - P(y)) - P(z)),
/// and for a fixed sign that expression is linear in w, so it is maximized at
/// a vertex of the simplex, i.e. a single deterministic strategy. The max of
/// the two signs is then attained at a vertex as well.
[[nodiscard]] ClassicalMaximum classical_ob_maximum(bool perfect_anticorrelation,
                                                    ObPattern pattern = ObPattern::standard);

using WeightedStrategy = std::pair<double, DeterministicStrategy>;
/// Atoms outside Lambda_s for each label s.
using FlipSets = std::map<Label, std::set<std::size_t>>;
/// Atoms in Gamma_st for each setting pair.
using DetectSets = std::map<SettingPair, std::set<std::size_t>>;

/// Model with defect sets: atoms in flip_sets[s] answer B_s = A_s, all
/// others B_s = -A_s. Only Alice's outcomes of the base strategies are used.
/// Every pair is detected. Rejects unnormalized weights, out-of-range atom
/// indices and any flip set heavier than `epsilon`.
[[nodiscard]] HiddenVariableModel make_epsilon_model(const std::vector<WeightedStrategy>& base,
                                                     const FlipSets& flip_sets, double epsilon);

/// Copy of `base` with the given detection sets. All nine setting pairs must
/// be present and carry the same mass (within 1e-12); otherwise the offending
/// pair is named in the exception.
[[nodiscard]] HiddenVariableModel make_detection_model(const HiddenVariableModel& base,
                                                       const DetectSets& detect_sets);

/// Result of an exact oracle search over uniform-weight atoms.
struct OracleMaximum {
  Rational maximum;
  /// The analytic bound the maximum is compared against.
  Rational bound;
  std::size_t atoms = 0;
  /// A model attaining `maximum`.
  HiddenVariableModel witness;
  /// Number of candidate configurations scored.
  std::size_t configurations = 0;
};

/// Exact maximum of the OB statistic over `atoms` equally weighted atoms,
/// every strategy assignment and every placement of defect sets with at most
/// epsilon * atoms atoms per label. epsilon must be a multiple of 1/atoms.
/// bound = 1 + 2 epsilon.
[[nodiscard]] OracleMaximum epsilon_ob_maximum(Rational epsilon, std::size_t atoms,
                                               ObPattern pattern = ObPattern::standard);
[[nodiscard]] OracleMaximum epsilon_ob_maximum(double epsilon, std::size_t atoms,
                                               ObPattern pattern = ObPattern::standard);

/// Exact maximum of the detection-conditioned statistic over `atoms` equally
/// weighted perfectly anti-correlated atoms, every strategy assignment and
/// every placement of detection sets with eta * atoms atoms per pair.
/// bound = (4 - 3 eta) / eta.
[[nodiscard]] OracleMaximum detection_ob_maximum(Rational eta, std::size_t atoms,
                                                 ObPattern pattern = ObPattern::detection);
[[nodiscard]] OracleMaximum detection_ob_maximum(double eta, std::size_t atoms,
                                                 ObPattern pattern = ObPattern::detection);

/// k/atoms if |x - k/atoms| <= tolerance for some integer k, else throws.
[[nodiscard]] Rational grid_fraction(double x, std::size_t atoms, double tolerance = 1e-9);

// Random generators for non-violation testing beyond the exact oracles.

/// Random strategies on `atoms` atoms with random (or uniform) weights, and
/// random defect sets of mass at most `epsilon` per label.
[[nodiscard]] HiddenVariableModel random_epsilon_model(RandomStream& rng, std::size_t atoms,
                                                       double epsilon, bool uniform_weights);

/// How detection sets are placed by random_detection_model.
enum class DetectionPlacement {
  uniform,      // each pair detects a uniformly random subset
  adversarial,  // each pair prefers atoms that push the statistic up
};

/// Uniform-weight base with defect sets (at most `flip_count` atoms per
/// label), then detection sets of exactly `detect_count` atoms per pair.
[[nodiscard]] HiddenVariableModel random_detection_model(RandomStream& rng, std::size_t atoms,
                                                         std::size_t flip_count,
                                                         std::size_t detect_count,
                                                         DetectionPlacement placement,
                                                         ObPattern pattern = ObPattern::detection);

}  // namespace obell
