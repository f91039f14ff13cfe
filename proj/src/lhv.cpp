#include "obell/lhv.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

namespace obell {

double lhv_correlation(const HiddenVariableModel& m, Label s, Label t) {
  require_valid(m);
  double sum = 0.0;
  for (std::size_t i = 0; i < m.atoms(); ++i) sum += m.weight(i) * m.strategy_at(i).product(s, t);
  return std::clamp(sum, -1.0, 1.0);
}

double lhv_conditional_correlation(const HiddenVariableModel& m, Label s, Label t) {
  require_valid(m);
  const SettingPair st{s, t};
  double mass = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < m.atoms(); ++i) {
    if (!m.detect_flag(i, st)) continue;
    mass += m.weight(i);
    sum += m.weight(i) * m.strategy_at(i).product(s, t);
  }
  if (!(mass > 0.0))
    throw InvalidArgument("detection set Gamma_" + st.name() +
                          " has zero mass; conditional correlation undefined");
  return std::clamp(sum / mass, -1.0, 1.0);
}

CorrelationTriple lhv_correlations(const HiddenVariableModel& m) {
  return {lhv_correlation(m, Label::a, Label::b), lhv_correlation(m, Label::a, Label::c),
          lhv_correlation(m, Label::b, Label::c)};
}

CorrelationTriple lhv_conditional_correlations(const HiddenVariableModel& m) {
  return {lhv_conditional_correlation(m, Label::a, Label::b),
          lhv_conditional_correlation(m, Label::a, Label::c),
          lhv_conditional_correlation(m, Label::b, Label::c)};
}

namespace {

// Bit k of `bits` (most significant first over `width` bits) -> +-1, with a
// clear bit mapping to -1 so that counting upward is lexicographic order.
int sign_at(unsigned bits, unsigned width, unsigned k) {
  return ((bits >> (width - 1 - k)) & 1U) ? 1 : -1;
}

std::array<int, 3> alice_outcomes(unsigned code) {
  return {sign_at(code, 3, 0), sign_at(code, 3, 1), sign_at(code, 3, 2)};
}

ExactCorrelationTriple strategy_products(const DeterministicStrategy& s) {
  return {s.product(Label::a, Label::b), s.product(Label::a, Label::c),
          s.product(Label::b, Label::c)};
}

int integer_product(const DeterministicStrategy& s, SettingPair st) {
  return s.product(st.first, st.second);
}

// Calls visit(counts) for every composition of `total` into counts.size()
// nonnegative parts.
void for_each_composition(std::size_t total, std::vector<std::size_t>& counts, std::size_t slot,
                          const std::function<void(const std::vector<std::size_t>&)>& visit) {
  if (slot + 1 == counts.size()) {
    counts[slot] = total;
    visit(counts);
    return;
  }
  for (std::size_t c = 0; c <= total; ++c) {
    counts[slot] = c;
    for_each_composition(total - c, counts, slot + 1, visit);
  }
}

void check_atoms(std::size_t atoms, std::size_t limit, const char* what) {
  if (atoms == 0 || atoms > limit) {
    std::ostringstream os;
    os << what << " needs between 1 and " << limit << " atoms, got " << atoms;
    throw InvalidArgument(os.str());
  }
}

}  // namespace

std::vector<DeterministicStrategy> enumerate_strategies(bool perfect_anticorrelation) {
  std::vector<DeterministicStrategy> out;
  if (perfect_anticorrelation) {
    out.reserve(8);
    for (unsigned code = 0; code < 8; ++code)
      out.push_back(DeterministicStrategy::anticorrelated(alice_outcomes(code)));
    return out;
  }
  out.reserve(64);
  for (unsigned code = 0; code < 64; ++code) {
    out.emplace_back(std::array<int, 3>{sign_at(code, 6, 0), sign_at(code, 6, 1), sign_at(code, 6, 2)},
                     std::array<int, 3>{sign_at(code, 6, 3), sign_at(code, 6, 4), sign_at(code, 6, 5)});
  }
  return out;
}

Rational strategy_statistic(const DeterministicStrategy& s, ObPattern pattern) {
  return ob_statistic(strategy_products(s), pattern);
}

ClassicalMaximum classical_ob_maximum(bool perfect_anticorrelation, ObPattern pattern) {
  ClassicalMaximum out;
  const auto strategies = enumerate_strategies(perfect_anticorrelation);
  out.strategies = strategies.size();
  out.values.reserve(strategies.size());
  bool first = true;
  for (const auto& s : strategies) {
    const Rational v = strategy_statistic(s, pattern);
    out.values.push_back(v);
    if (first || v > out.maximum) {
      out.maximum = v;
      out.witness = s;
      first = false;
    }
  }
  return out;
}

HiddenVariableModel make_epsilon_model(const std::vector<WeightedStrategy>& base,
                                       const FlipSets& flip_sets, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidArgument("epsilon must lie in [0, 1]");
  const std::size_t n = base.size();
  std::vector<double> weights;
  weights.reserve(n);
  double total = 0.0;
  for (const auto& [w, s] : base) {
    if (!(w >= 0.0)) throw InvalidArgument("atom weights must be nonnegative");
    weights.push_back(w);
    total += w;
  }
  if (n == 0 || std::abs(total - 1.0) > 1e-12)
    throw InvalidArgument("atom weights must sum to 1");

  std::vector<HiddenVariableModel::AnticorrFlags> anticorr(n, {true, true, true});
  for (const auto& [label, atoms] : flip_sets) {
    double mass = 0.0;
    for (std::size_t atom : atoms) {
      if (atom >= n) {
        std::ostringstream os;
        os << "flip set for label " << label_char(label) << " names atom " << atom
           << " but the model has " << n << " atoms";
        throw InvalidArgument(os.str());
      }
      anticorr[atom][index(label)] = false;
      mass += weights[atom];
    }
    if (mass > epsilon + 1e-12) {
      std::ostringstream os;
      os.precision(17);
      os << "flip set for label " << label_char(label) << " has mass " << mass
         << ", exceeding declared epsilon " << epsilon;
      throw InvalidArgument(os.str());
    }
  }

  std::vector<DeterministicStrategy> strategies;
  strategies.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = base[i].second.a_values();
    std::array<int, 3> b{};
    for (Label s : kLabels) b[index(s)] = anticorr[i][index(s)] ? -a[index(s)] : a[index(s)];
    strategies.emplace_back(a, b);
  }
  HiddenVariableModel::DetectFlags all{};
  all.fill(true);
  return {std::move(weights), std::move(strategies), std::move(anticorr),
          std::vector<HiddenVariableModel::DetectFlags>(n, all)};
}

HiddenVariableModel make_detection_model(const HiddenVariableModel& base,
                                         const DetectSets& detect_sets) {
  const std::size_t n = base.atoms();
  std::vector<HiddenVariableModel::DetectFlags> detect(n);
  for (auto& f : detect) f.fill(false);

  std::optional<double> reference;
  SettingPair reference_pair;
  for (std::size_t q = 0; q < kPairCount; ++q) {
    const SettingPair st = SettingPair::from_index(q);
    auto it = detect_sets.find(st);
    if (it == detect_sets.end())
      throw InvalidArgument("detection set for pair " + st.name() + " is missing");
    double mass = 0.0;
    for (std::size_t atom : it->second) {
      if (atom >= n) {
        std::ostringstream os;
        os << "detection set for pair " << st.name() << " names atom " << atom
           << " but the model has " << n << " atoms";
        throw InvalidArgument(os.str());
      }
      detect[atom][q] = true;
      mass += base.weight(atom);
    }
    if (!reference) {
      reference = mass;
      reference_pair = st;
    } else if (std::abs(mass - *reference) > 1e-12) {
      std::ostringstream os;
      os.precision(17);
      os << "detection set for pair " << st.name() << " has mass " << mass << ", but pair "
         << reference_pair.name() << " has mass " << *reference
         << "; detection efficiency must not depend on the setting pair";
      throw InvalidArgument(os.str());
    }
  }
  return {base.weights(), base.strategies(), base.anticorr_flags(), std::move(detect)};
}

Rational grid_fraction(double x, std::size_t atoms, double tolerance) {
  if (atoms == 0) throw InvalidArgument("atom count must be positive");
  const double scaled = x * static_cast<double>(atoms);
  const auto k = static_cast<std::int64_t>(std::llround(scaled));
  if (!std::isfinite(scaled) ||
      std::abs(x - static_cast<double>(k) / static_cast<double>(atoms)) > tolerance) {
    std::ostringstream os;
    os.precision(17);
    os << x << " is not a multiple of 1/" << atoms;
    throw InvalidArgument(os.str());
  }
  return {k, static_cast<std::int64_t>(atoms)};
}

OracleMaximum epsilon_ob_maximum(Rational epsilon, std::size_t atoms, ObPattern pattern) {
  check_atoms(atoms, kMaxEpsilonAtoms, "epsilon oracle");
  if (epsilon < Rational(0) || epsilon > Rational(1))
    throw InvalidArgument("epsilon must lie in [0, 1]");
  const Rational scaled = epsilon * Rational(static_cast<std::int64_t>(atoms));
  if (scaled.den() != 1) throw InvalidArgument("epsilon must be a multiple of 1/atoms");
  const auto max_flips = static_cast<std::size_t>(scaled.num());
  const auto pairs = pattern_pairs(pattern);

  // Per-atom contribution of sign * (P(x) - P(y)) - P(z) depends on Alice's
  // outcomes (8 codes) and which labels are flipped (8 masks). For each sign
  // and mask keep the best Alice code.
  struct Choice {
    int value = std::numeric_limits<int>::min();
    unsigned code = 0;
  };
  std::array<std::array<Choice, 8>, 2> best{};
  for (int sign_index = 0; sign_index < 2; ++sign_index) {
    const int sign = sign_index == 0 ? 1 : -1;
    for (unsigned mask = 0; mask < 8; ++mask) {
      for (unsigned code = 0; code < 8; ++code) {
        const auto a = alice_outcomes(code);
        std::array<int, 3> b{};
        for (unsigned s = 0; s < 3; ++s) b[s] = (mask >> s) & 1U ? a[s] : -a[s];
        const DeterministicStrategy st(a, b);
        const int v = sign * (integer_product(st, pairs[0]) - integer_product(st, pairs[1])) -
                      integer_product(st, pairs[2]);
        if (v > best[sign_index][mask].value) best[sign_index][mask] = {v, code};
      }
    }
  }

  long best_total = std::numeric_limits<long>::min();
  std::vector<std::size_t> best_counts;
  int best_sign = 0;
  std::size_t examined = 0;
  std::vector<std::size_t> counts(8);
  for (int sign_index = 0; sign_index < 2; ++sign_index) {
    for_each_composition(atoms, counts, 0, [&](const std::vector<std::size_t>& c) {
      for (unsigned s = 0; s < 3; ++s) {
        std::size_t flipped = 0;
        for (unsigned mask = 0; mask < 8; ++mask)
          if ((mask >> s) & 1U) flipped += c[mask];
        if (flipped > max_flips) return;
      }
      ++examined;
      long total = 0;
      for (unsigned mask = 0; mask < 8; ++mask)
        total += static_cast<long>(c[mask]) * best[sign_index][mask].value;
      if (total > best_total) {
        best_total = total;
        best_counts = c;
        best_sign = sign_index;
      }
    });
  }

  std::vector<WeightedStrategy> base;
  FlipSets flips;
  const double w = 1.0 / static_cast<double>(atoms);
  for (unsigned mask = 0; mask < 8; ++mask) {
    for (std::size_t k = 0; k < best_counts[mask]; ++k) {
      const std::size_t atom = base.size();
      base.emplace_back(w, DeterministicStrategy::anticorrelated(
                               alice_outcomes(best[best_sign][mask].code)));
      for (unsigned s = 0; s < 3; ++s)
        if ((mask >> s) & 1U) flips[kLabels[s]].insert(atom);
    }
  }
  const double eps_value = epsilon.to_double();
  OracleMaximum out{Rational(best_total, static_cast<std::int64_t>(atoms)),
                    Rational(1) + Rational(2) * epsilon, atoms,
                    make_epsilon_model(base, flips, eps_value), examined};
  return out;
}

OracleMaximum epsilon_ob_maximum(double epsilon, std::size_t atoms, ObPattern pattern) {
  check_atoms(atoms, kMaxEpsilonAtoms, "epsilon oracle");
  return epsilon_ob_maximum(grid_fraction(epsilon, atoms), atoms, pattern);
}

OracleMaximum detection_ob_maximum(Rational eta, std::size_t atoms, ObPattern pattern) {
  check_atoms(atoms, kMaxDetectionAtoms, "detection oracle");
  if (eta <= Rational(0) || eta > Rational(1)) throw InvalidArgument("eta must lie in (0, 1]");
  const Rational scaled = eta * Rational(static_cast<std::int64_t>(atoms));
  if (scaled.den() != 1) throw InvalidArgument("eta must be a multiple of 1/atoms");
  const auto k = static_cast<std::size_t>(scaled.num());
  const auto pairs = pattern_pairs(pattern);

  // Detection sets are chosen independently per pair, so for a fixed sign
  // each pair keeps as many atoms as possible whose product agrees with its
  // coefficient: the pair contributes 2 min(k, m) - k detected units, where m
  // counts those atoms.
  std::array<std::array<int, 3>, 8> products{};
  for (unsigned code = 0; code < 8; ++code) {
    const auto st = DeterministicStrategy::anticorrelated(alice_outcomes(code));
    for (std::size_t q = 0; q < 3; ++q) products[code][q] = integer_product(st, pairs[q]);
  }

  long best_total = std::numeric_limits<long>::min();
  std::vector<std::size_t> best_counts;
  int best_sign = 1;
  std::size_t examined = 0;
  std::vector<std::size_t> counts(8);
  for (int sign : {1, -1}) {
    const std::array<int, 3> coeff{sign, -sign, -1};
    for_each_composition(atoms, counts, 0, [&](const std::vector<std::size_t>& c) {
      ++examined;
      long total = 0;
      for (std::size_t q = 0; q < 3; ++q) {
        std::size_t agree = 0;
        for (unsigned code = 0; code < 8; ++code)
          if (products[code][q] == coeff[q]) agree += c[code];
        total += 2 * static_cast<long>(std::min(k, agree)) - static_cast<long>(k);
      }
      if (total > best_total) {
        best_total = total;
        best_counts = c;
        best_sign = sign;
      }
    });
  }

  std::vector<double> weights(atoms, 1.0 / static_cast<double>(atoms));
  std::vector<DeterministicStrategy> strategies;
  std::vector<unsigned> codes;
  for (unsigned code = 0; code < 8; ++code) {
    for (std::size_t j = 0; j < best_counts[code]; ++j) {
      strategies.push_back(DeterministicStrategy::anticorrelated(alice_outcomes(code)));
      codes.push_back(code);
    }
  }
  auto base = HiddenVariableModel::from_strategies(std::move(weights), std::move(strategies));

  DetectSets sets;
  for (std::size_t q = 0; q < kPairCount; ++q) {
    std::set<std::size_t> first_k;
    for (std::size_t i = 0; i < k; ++i) first_k.insert(i);
    sets[SettingPair::from_index(q)] = std::move(first_k);
  }
  const std::array<int, 3> coeff{best_sign, -best_sign, -1};
  for (std::size_t q = 0; q < 3; ++q) {
    std::vector<std::size_t> order(atoms);
    std::iota(order.begin(), order.end(), 0);
    std::stable_partition(order.begin(), order.end(),
                          [&](std::size_t i) { return products[codes[i]][q] == coeff[q]; });
    sets[pairs[q]] = std::set<std::size_t>(order.begin(), order.begin() + static_cast<long>(k));
  }

  const Rational kk(static_cast<std::int64_t>(k));
  return {Rational(best_total) / kk, (Rational(4) - Rational(3) * eta) / eta, atoms,
          make_detection_model(base, sets), examined};
}

OracleMaximum detection_ob_maximum(double eta, std::size_t atoms, ObPattern pattern) {
  check_atoms(atoms, kMaxDetectionAtoms, "detection oracle");
  return detection_ob_maximum(grid_fraction(eta, atoms), atoms, pattern);
}

namespace {

std::array<int, 3> random_outcomes(RandomStream& rng) {
  return alice_outcomes(static_cast<unsigned>(rng.below(8)));
}

std::vector<std::size_t> shuffled_atoms(RandomStream& rng, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  return order;
}

}  // namespace

HiddenVariableModel random_epsilon_model(RandomStream& rng, std::size_t atoms, double epsilon,
                                         bool uniform_weights) {
  if (atoms == 0) throw InvalidArgument("atom count must be positive");
  std::vector<double> weights(atoms, 1.0 / static_cast<double>(atoms));
  if (!uniform_weights) {
    double total = 0.0;
    for (double& w : weights) {
      w = -std::log(1.0 - rng.uniform());
      total += w;
    }
    for (double& w : weights) w /= total;
  }
  std::vector<WeightedStrategy> base;
  base.reserve(atoms);
  for (std::size_t i = 0; i < atoms; ++i)
    base.emplace_back(weights[i], DeterministicStrategy::anticorrelated(random_outcomes(rng)));

  FlipSets flips;
  for (Label s : kLabels) {
    double mass = 0.0;
    for (std::size_t atom : shuffled_atoms(rng, atoms)) {
      if (rng.bernoulli(0.15)) break;
      if (mass + weights[atom] > epsilon) continue;
      flips[s].insert(atom);
      mass += weights[atom];
    }
  }
  return make_epsilon_model(base, flips, epsilon);
}

HiddenVariableModel random_detection_model(RandomStream& rng, std::size_t atoms,
                                           std::size_t flip_count, std::size_t detect_count,
                                           DetectionPlacement placement, ObPattern pattern) {
  if (atoms == 0) throw InvalidArgument("atom count must be positive");
  if (detect_count == 0 || detect_count > atoms)
    throw InvalidArgument("detect_count must lie in [1, atoms]");
  const double w = 1.0 / static_cast<double>(atoms);
  std::vector<WeightedStrategy> base;
  for (std::size_t i = 0; i < atoms; ++i)
    base.emplace_back(w, DeterministicStrategy::anticorrelated(random_outcomes(rng)));
  FlipSets flips;
  for (Label s : kLabels) {
    const auto order = shuffled_atoms(rng, atoms);
    const auto count = static_cast<std::size_t>(rng.below(std::min(flip_count, atoms) + 1));
    flips[s] = std::set<std::size_t>(order.begin(), order.begin() + static_cast<long>(count));
  }
  const double epsilon = static_cast<double>(flip_count) * w;
  const auto model = make_epsilon_model(base, flips, std::min(1.0, epsilon + 1e-12));

  const auto pairs = pattern_pairs(pattern);
  const int sign = rng.bernoulli(0.5) ? 1 : -1;
  const std::array<int, 3> coeff{sign, -sign, -1};
  DetectSets sets;
  for (std::size_t q = 0; q < kPairCount; ++q) {
    const SettingPair st = SettingPair::from_index(q);
    auto order = shuffled_atoms(rng, atoms);
    if (placement == DetectionPlacement::adversarial) {
      for (std::size_t p = 0; p < 3; ++p) {
        if (pairs[p] != st) continue;
        std::stable_partition(order.begin(), order.end(), [&](std::size_t i) {
          return model.strategy_at(i).product(st.first, st.second) == coeff[p];
        });
      }
    }
    sets[st] = std::set<std::size_t>(order.begin(), order.begin() + static_cast<long>(detect_count));
  }
  return make_detection_model(model, sets);
}

}  // namespace obell
