#include "obell/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace obell {

double dot(const Vec3& x, const Vec3& y) { return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; }

double norm(const Vec3& x) { return std::hypot(x[0], x[1], x[2]); }

MeasurementSetting MeasurementSetting::from_vector(const Vec3& v) {
  const double n = norm(v);
  if (!std::isfinite(n)) throw InvalidArgument("measurement axis must be finite");
  if (n == 0.0) throw InvalidArgument("measurement axis must have nonzero norm");
  Vec3 unit{v[0] / n, v[1] / n, v[2] / n};
  // Already-unit input is kept bit-for-bit so that normalization is idempotent.
  if (std::abs(n - 1.0) <= 1e-15) unit = v;
  return MeasurementSetting(unit);
}

MeasurementSetting MeasurementSetting::planar(double angle) {
  return from_vector({std::cos(angle), std::sin(angle), 0.0});
}

MeasurementSetting make_setting(const Vec3& v) { return MeasurementSetting::from_vector(v); }

char label_char(Label s) { return static_cast<char>('a' + index(s)); }

Label parse_label(char ch) {
  switch (ch) {
    case 'a': return Label::a;
    case 'b': return Label::b;
    case 'c': return Label::c;
    default: throw InvalidArgument(std::string("unknown setting label '") + ch + "'");
  }
}

std::string SettingPair::name() const { return {label_char(first), label_char(second)}; }

SettingPair SettingPair::from_index(std::size_t i) {
  if (i >= kPairCount) throw InvalidArgument("setting pair index out of range");
  return {kLabels[i / 3], kLabels[i % 3]};
}

SettingPair SettingPair::parse(std::string_view name) {
  if (name.size() != 2) throw InvalidArgument("setting pair must be two labels, got '" + std::string(name) + "'");
  return {parse_label(name[0]), parse_label(name[1])};
}

std::string_view pattern_name(ObPattern p) {
  return p == ObPattern::standard ? "standard" : "detection";
}

ObPattern parse_pattern(std::string_view name) {
  if (name == "standard") return ObPattern::standard;
  if (name == "detection") return ObPattern::detection;
  throw InvalidArgument("unknown statistic pattern '" + std::string(name) +
                        "' (expected standard or detection)");
}

std::array<SettingPair, 3> pattern_pairs(ObPattern p) {
  using L = Label;
  if (p == ObPattern::standard) return {{{L::a, L::b}, {L::a, L::c}, {L::b, L::c}}};
  return {{{L::a, L::b}, {L::b, L::c}, {L::a, L::c}}};
}

void CorrelationTriple::check() const {
  for (double v : {p_ab, p_ac, p_bc}) {
    if (!(v >= -1.0 && v <= 1.0)) {
      std::ostringstream os;
      os << "correlation " << v << " outside [-1, 1]";
      throw InvalidArgument(os.str());
    }
  }
}

NoiseParameters::NoiseParameters(double epsilon, double eta) : epsilon_(epsilon), eta_(eta) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidArgument("epsilon must lie in [0, 1]");
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("eta must lie in (0, 1]");
}

DeterministicStrategy::DeterministicStrategy(std::array<int, 3> a_out, std::array<int, 3> b_out)
    : a_out_(a_out), b_out_(b_out) {
  for (int i = 0; i < 3; ++i) {
    if ((a_out_[i] != 1 && a_out_[i] != -1) || (b_out_[i] != 1 && b_out_[i] != -1))
      throw InvalidArgument("strategy outcomes must be +1 or -1");
  }
}

DeterministicStrategy DeterministicStrategy::anticorrelated(std::array<int, 3> a_out) {
  return {a_out, {-a_out[0], -a_out[1], -a_out[2]}};
}

DeterministicStrategy DeterministicStrategy::flipped() const {
  return {{-a_out_[0], -a_out_[1], -a_out_[2]}, {-b_out_[0], -b_out_[1], -b_out_[2]}};
}

HiddenVariableModel::HiddenVariableModel(std::vector<double> weights,
                                         std::vector<DeterministicStrategy> strategy_at,
                                         std::vector<AnticorrFlags> anticorr_flag,
                                         std::vector<DetectFlags> detect_flag)
    : weights_(std::move(weights)),
      strategy_at_(std::move(strategy_at)),
      anticorr_flag_(std::move(anticorr_flag)),
      detect_flag_(std::move(detect_flag)) {
  const std::size_t n = weights_.size();
  if (strategy_at_.size() != n || anticorr_flag_.size() != n || detect_flag_.size() != n)
    throw InvalidArgument("hidden-variable model: per-atom fields must have equal length");
}

HiddenVariableModel HiddenVariableModel::from_strategies(
    std::vector<double> weights, std::vector<DeterministicStrategy> strategies) {
  std::vector<AnticorrFlags> anticorr;
  anticorr.reserve(strategies.size());
  for (const auto& st : strategies) {
    AnticorrFlags f{};
    for (Label s : kLabels) f[index(s)] = st.b_out(s) == -st.a_out(s);
    anticorr.push_back(f);
  }
  DetectFlags all{};
  all.fill(true);
  std::vector<DetectFlags> detect(strategies.size(), all);
  return {std::move(weights), std::move(strategies), std::move(anticorr), std::move(detect)};
}

double HiddenVariableModel::defect_mass(Label s) const {
  double mass = 0.0;
  for (std::size_t i = 0; i < atoms(); ++i)
    if (!anticorr_flag(i, s)) mass += weights_[i];
  return mass;
}

double HiddenVariableModel::max_defect_mass() const {
  double m = 0.0;
  for (Label s : kLabels) m = std::max(m, defect_mass(s));
  return m;
}

double HiddenVariableModel::detection_mass(SettingPair st) const {
  double mass = 0.0;
  for (std::size_t i = 0; i < atoms(); ++i)
    if (detect_flag(i, st)) mass += weights_[i];
  return mass;
}

bool HiddenVariableModel::fully_detected() const {
  for (const auto& f : detect_flag_)
    for (bool d : f)
      if (!d) return false;
  return true;
}

std::vector<ModelViolation> validate_model(const HiddenVariableModel& m) {
  std::vector<ModelViolation> out;
  if (m.atoms() == 0) {
    out.push_back({std::nullopt, "weights", "model has no atoms"});
    return out;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < m.atoms(); ++i) {
    const double w = m.weight(i);
    if (!(w >= 0.0) || !std::isfinite(w))
      out.push_back({i, "weights", "weight " + std::to_string(w) + " is negative or not finite"});
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "weights sum to " << total << ", not 1 (normalization)";
    out.push_back({std::nullopt, "weights", os.str()});
  }
  for (std::size_t i = 0; i < m.atoms(); ++i) {
    const auto& st = m.strategy_at(i);
    for (Label s : kLabels) {
      const bool anti = m.anticorr_flag(i, s);
      if (anti && st.b_out(s) != -st.a_out(s)) {
        out.push_back({i, std::string("anticorr_flag.") + label_char(s),
                       "atom is in Lambda_" + std::string(1, label_char(s)) +
                           " but B_s != -A_s (perfect anti-correlation A_s = -B_s violated)"});
      } else if (!anti && st.b_out(s) != st.a_out(s)) {
        out.push_back({i, std::string("anticorr_flag.") + label_char(s),
                       "atom is outside Lambda_" + std::string(1, label_char(s)) +
                           " but B_s != A_s (dichotomous outcomes force equality there)"});
      }
    }
  }
  return out;
}

namespace {
std::string describe(const std::vector<ModelViolation>& v) {
  std::ostringstream os;
  os << "invalid hidden-variable model:";
  for (const auto& x : v) {
    os << "\n  ";
    if (x.atom) os << "atom " << *x.atom << ' ';
    os << x.field << ": " << x.message;
  }
  return os.str();
}
}  // namespace

InvalidModel::InvalidModel(std::vector<ModelViolation> violations)
    : InvalidArgument(describe(violations)), violations_(std::move(violations)) {}

void require_valid(const HiddenVariableModel& m) {
  auto v = validate_model(m);
  if (!v.empty()) throw InvalidModel(std::move(v));
}

double ob_statistic(const CorrelationTriple& t, ObPattern pattern) {
  if (pattern == ObPattern::standard) return std::abs(t.p_ab - t.p_ac) - t.p_bc;
  return std::abs(t.p_ab - t.p_bc) - t.p_ac;
}

Rational ob_statistic(const ExactCorrelationTriple& t, ObPattern pattern) {
  if (pattern == ObPattern::standard) return abs(t.p_ab - t.p_ac) - t.p_bc;
  return abs(t.p_ab - t.p_bc) - t.p_ac;
}

}  // namespace obell
