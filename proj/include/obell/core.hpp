#pragma once

// Domain types shared by every obell module: measurement settings,
// correlation triples, noise parameters and finite hidden-variable models.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "obell/rational.hpp"

namespace obell {

/// Thrown for inputs that violate an operation's preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Comparison tolerance for floating-point identities unless a caller
/// states otherwise.
inline constexpr double kDefaultTolerance = 1e-9;

using Vec3 = std::array<double, 3>;

[[nodiscard]] double dot(const Vec3& x, const Vec3& y);
[[nodiscard]] double norm(const Vec3& x);

/// Spin-projection axis. Always unit length (within 1e-12).
class MeasurementSetting {
 public:
  /// The x axis.
  MeasurementSetting() = default;
  /// Normalizes `v`; throws InvalidArgument on a zero or non-finite vector.
  static MeasurementSetting from_vector(const Vec3& v);
  /// Unit vector (cos angle, sin angle, 0) in the z = 0 plane.
  static MeasurementSetting planar(double angle);

  [[nodiscard]] const Vec3& axis() const { return axis_; }
  [[nodiscard]] double operator[](std::size_t i) const { return axis_[i]; }

  friend bool operator==(const MeasurementSetting&, const MeasurementSetting&) = default;

 private:
  explicit MeasurementSetting(const Vec3& unit) : axis_(unit) {}
  Vec3 axis_{1.0, 0.0, 0.0};
};

[[nodiscard]] MeasurementSetting make_setting(const Vec3& v);
[[nodiscard]] inline double dot(const MeasurementSetting& x, const MeasurementSetting& y) {
  return dot(x.axis(), y.axis());
}

/// The three settings a, b, c of the OB statistic. Coincident settings are legal.
struct SettingTriple {
  MeasurementSetting a;
  MeasurementSetting b;
  MeasurementSetting c;
};

/// Four CHSH settings: Alice a, a', Bob b, b'.
struct ChshSettings {
  MeasurementSetting a;
  MeasurementSetting a_prime;
  MeasurementSetting b;
  MeasurementSetting b_prime;
};

/// Setting labels of the OB scenario.
enum class Label : std::uint8_t { a = 0, b = 1, c = 2 };
inline constexpr std::array<Label, 3> kLabels{Label::a, Label::b, Label::c};

[[nodiscard]] constexpr std::size_t index(Label s) { return static_cast<std::size_t>(s); }
[[nodiscard]] char label_char(Label s);
[[nodiscard]] Label parse_label(char ch);

/// Ordered (Alice setting, Bob setting) pair.
struct SettingPair {
  Label first = Label::a;
  Label second = Label::a;

  /// Row-major position in the 3x3 pair table: 3 * first + second.
  [[nodiscard]] constexpr std::size_t index() const {
    return 3 * obell::index(first) + obell::index(second);
  }
  [[nodiscard]] std::string name() const;
  static SettingPair from_index(std::size_t i);
  static SettingPair parse(std::string_view name);

  friend auto operator<=>(const SettingPair&, const SettingPair&) = default;
};
inline constexpr std::size_t kPairCount = 9;

/// Which pairs enter the OB statistic, and where the minus sign sits.
enum class ObPattern : std::uint8_t {
  /// |P(a,b) - P(a,c)| - P(b,c): the original Bell form.
  standard,
  /// |P(a,b) - P(b,c)| - P(a,c): the form used for detection-conditioned
  /// correlations.
  detection,
};

[[nodiscard]] std::string_view pattern_name(ObPattern p);
[[nodiscard]] ObPattern parse_pattern(std::string_view name);
/// The three pairs (x, y, z) such that the statistic is |P(x) - P(y)| - P(z).
[[nodiscard]] std::array<SettingPair, 3> pattern_pairs(ObPattern p);

/// Pairwise correlations P(a,b), P(a,c), P(b,c), each in [-1, 1].
struct CorrelationTriple {
  double p_ab = 0.0;
  double p_ac = 0.0;
  double p_bc = 0.0;

  /// Throws InvalidArgument if any entry is outside [-1, 1] (or NaN).
  void check() const;
};

/// Same triple over exact fractions, produced by enumeration.
struct ExactCorrelationTriple {
  Rational p_ab;
  Rational p_ac;
  Rational p_bc;
};

/// Anti-correlation defect epsilon (gamma = 1 - epsilon) and joint detection
/// efficiency eta. The kappa parameter of the combined bound is the same
/// quantity as gamma.
class NoiseParameters {
 public:
  NoiseParameters(double epsilon, double eta);
  static NoiseParameters from_gamma(double gamma, double eta) {
    return {1.0 - gamma, eta};
  }

  [[nodiscard]] double epsilon() const { return epsilon_; }
  [[nodiscard]] double gamma() const { return 1.0 - epsilon_; }
  [[nodiscard]] double eta() const { return eta_; }

 private:
  double epsilon_;
  double eta_;
};

/// A vertex of the LHV polytope: fixed +-1 outcomes for every local setting.
class DeterministicStrategy {
 public:
  DeterministicStrategy() = default;
  /// Entries are indexed by Label; each must be exactly +1 or -1.
  DeterministicStrategy(std::array<int, 3> a_out, std::array<int, 3> b_out);

  /// Bob answers the opposite of Alice on every setting.
  static DeterministicStrategy anticorrelated(std::array<int, 3> a_out);

  [[nodiscard]] int a_out(Label s) const { return a_out_[index(s)]; }
  [[nodiscard]] int b_out(Label s) const { return b_out_[index(s)]; }
  [[nodiscard]] const std::array<int, 3>& a_values() const { return a_out_; }
  [[nodiscard]] const std::array<int, 3>& b_values() const { return b_out_; }
  [[nodiscard]] int product(Label s, Label t) const { return a_out(s) * b_out(t); }
  [[nodiscard]] DeterministicStrategy flipped() const;

  friend bool operator==(const DeterministicStrategy&, const DeterministicStrategy&) = default;

 private:
  std::array<int, 3> a_out_{1, 1, 1};
  std::array<int, 3> b_out_{-1, -1, -1};
};

/// Finite hidden-variable model: atoms with weights, a deterministic strategy
/// per atom, membership in the anti-correlation sets Lambda_s and in the
/// pairwise detection sets Gamma_st.
///
/// Construction only checks structural consistency (matching lengths). The
/// probabilistic invariants are reported by validate_model so that malformed
/// input can be diagnosed instead of rejected outright.
class HiddenVariableModel {
 public:
  using AnticorrFlags = std::array<bool, 3>;
  using DetectFlags = std::array<bool, kPairCount>;

  HiddenVariableModel(std::vector<double> weights,
                      std::vector<DeterministicStrategy> strategy_at,
                      std::vector<AnticorrFlags> anticorr_flag,
                      std::vector<DetectFlags> detect_flag);

  /// Anti-correlation flags are read off the strategies (b == -a); every
  /// pair is detected.
  static HiddenVariableModel from_strategies(std::vector<double> weights,
                                             std::vector<DeterministicStrategy> strategies);

  [[nodiscard]] std::size_t atoms() const { return weights_.size(); }
  [[nodiscard]] double weight(std::size_t atom) const { return weights_[atom]; }
  [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
  [[nodiscard]] const DeterministicStrategy& strategy_at(std::size_t atom) const {
    return strategy_at_[atom];
  }
  [[nodiscard]] bool anticorr_flag(std::size_t atom, Label s) const {
    return anticorr_flag_[atom][index(s)];
  }
  [[nodiscard]] bool detect_flag(std::size_t atom, SettingPair st) const {
    return detect_flag_[atom][st.index()];
  }
  [[nodiscard]] const std::vector<DeterministicStrategy>& strategies() const {
    return strategy_at_;
  }
  [[nodiscard]] const std::vector<AnticorrFlags>& anticorr_flags() const {
    return anticorr_flag_;
  }
  [[nodiscard]] const std::vector<DetectFlags>& detect_flags() const { return detect_flag_; }

  /// Total weight of atoms outside Lambda_s (where A_s = B_s).
  [[nodiscard]] double defect_mass(Label s) const;
  /// max over labels of defect_mass.
  [[nodiscard]] double max_defect_mass() const;
  /// Total weight of Gamma_st.
  [[nodiscard]] double detection_mass(SettingPair st) const;
  [[nodiscard]] bool fully_detected() const;

  friend bool operator==(const HiddenVariableModel&, const HiddenVariableModel&) = default;

 private:
  std::vector<double> weights_;
  std::vector<DeterministicStrategy> strategy_at_;
  std::vector<AnticorrFlags> anticorr_flag_;
  std::vector<DetectFlags> detect_flag_;
};

/// One diagnostic from validate_model.
struct ModelViolation {
  std::optional<std::size_t> atom;  // unset for model-wide problems
  std::string field;
  std::string message;
};

/// Empty iff the weights form a probability vector (within 1e-12) and every
/// atom's outcomes agree with its anti-correlation flags.
[[nodiscard]] std::vector<ModelViolation> validate_model(const HiddenVariableModel& m);

/// Thrown when an operation requires a valid model and receives an invalid one.
class InvalidModel : public InvalidArgument {
 public:
  explicit InvalidModel(std::vector<ModelViolation> violations);
  [[nodiscard]] const std::vector<ModelViolation>& violations() const { return violations_; }

 private:
  std::vector<ModelViolation> violations_;
};

void require_valid(const HiddenVariableModel& m);

/// One simulated event. Outcomes exist even when the pair went undetected.
struct TrialRecord {
  SettingPair setting_pair;
  int outcome_alice = 1;
  int outcome_bob = 1;
  bool detected = true;
};

/// The OB statistic |P(x) - P(y)| - P(z) for the pairs selected by `pattern`.
[[nodiscard]] double ob_statistic(const CorrelationTriple& t,
                                  ObPattern pattern = ObPattern::standard);
[[nodiscard]] Rational ob_statistic(const ExactCorrelationTriple& t,
                                    ObPattern pattern = ObPattern::standard);

}  // namespace obell
